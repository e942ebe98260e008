"""Natural exponential families generated by a basis measure.

``Nef`` is the abstract family: Laplace transform, cumulant function and
its first two θ-derivatives, mean map and its inverse, tilted law and
sampling. ``AtomicNef`` covers bases with atoms on ℕ (sums in log space
with adaptive truncation), ``DensityNef`` covers bases with a density on an
interval (adaptive quadrature of the tilted density).
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from mpmath.ctx_mp import MPContext
from scipy import integrate, optimize
from scipy.special import logsumexp

from nef_toolkit.errors import (
    MeanOutOfDomain,
    NonConvergent,
    SamplerUnavailable,
    ThetaOutOfDomain,
)
from nef_toolkit.infrastructure.logging import get_logger


logger = get_logger(__name__)

Cumulants = Tuple[float, float, float]


class BasisKind(str, Enum):
    """Shape of the basis measure."""

    ATOMS = "atoms-on-N"
    DENSITY = "density-on-interval"


@dataclass(frozen=True)
class ThetaInterval:
    """Open parameter interval Θ = (lower, upper); endpoints may be infinite."""

    lower: float = -math.inf
    upper: float = math.inf

    def contains(self, theta: float) -> bool:
        return self.lower < theta < self.upper

    def __str__(self) -> str:
        return f"({self.lower:g}, {self.upper:g})"


def probe_grid(bounds: Tuple[float, float], count: int) -> np.ndarray:
    """Uniform grid of ``count`` probe values over the closed range ``bounds``."""
    return np.linspace(bounds[0], bounds[1], count)


class Nef(ABC):
    """One-parameter natural exponential family F_θ(dx) = e^{θx − κ(θ)} β(dx).

    The Laplace transform of the basis is written L(θ) throughout; some
    sources call the same function g(θ).
    """

    kind: BasisKind

    def __init__(
        self,
        label: str,
        theta_interval: ThetaInterval,
        probe_range: Tuple[float, float],
        mean_domain: Tuple[float, float] = (-math.inf, math.inf),
        variance_poly: Optional[Sequence[float]] = None,
    ):
        self.label = label
        self.theta_interval = theta_interval
        self.probe_range = probe_range
        self.mean_domain = mean_domain
        self.variance_poly = tuple(variance_poly) if variance_poly is not None else None

    def __repr__(self) -> str:
        return f"{type(self).__name__}(label={self.label!r}, theta={self.theta_interval})"

    # parameter checks

    def check_theta(self, theta: float) -> None:
        if not self.theta_interval.contains(theta):
            raise ThetaOutOfDomain(
                f"θ = {theta} is outside Θ = {self.theta_interval} for {self.label}",
                {"family": self.label, "theta": theta},
            )

    def check_mean(self, mu: float) -> None:
        lower, upper = self.mean_domain
        if not (lower < mu < upper) or not math.isfinite(mu):
            raise MeanOutOfDomain(
                f"μ = {mu} is outside the mean domain ({lower:g}, {upper:g}) of {self.label}",
                {"family": self.label, "mu": mu},
            )

    # cumulant machinery

    @abstractmethod
    def _cumulants(self, theta: float) -> Cumulants:
        """(κ, κ′, κ″) at an already validated θ."""

    def exact_cumulants(self, theta: float) -> Optional[Cumulants]:
        """Closed-form (κ, κ′, κ″) when the family has one."""
        return None

    def cumulant_derivs(self, theta: float) -> Cumulants:
        self.check_theta(theta)
        return self._cumulants(theta)

    def laplace(self, theta: float) -> float:
        """L(θ) = ∫ e^{θx} β(dx)."""
        return math.exp(self.cumulant_derivs(theta)[0])

    def mean(self, theta: float) -> float:
        return self.cumulant_derivs(theta)[1]

    def variance(self, theta: float) -> float:
        return self.cumulant_derivs(theta)[2]

    def variance_function(self, mu: float) -> Optional[float]:
        """Polynomial VF evaluated at μ, or None when the family has none registered."""
        if self.variance_poly is None:
            return None
        return float(np.polynomial.polynomial.polyval(mu, self.variance_poly))

    def mean_inverse(self, mu: float) -> float:
        """θ(μ): bracketing, Brent's method and a Newton polish on κ′."""
        self.check_mean(mu)
        lower, upper = self._bracket(mu)
        if lower == upper:
            return lower
        theta = optimize.brentq(
            lambda t: self._cumulants(t)[1] - mu, lower, upper, xtol=1e-15, rtol=1e-15, maxiter=200
        )
        for _ in range(2):
            _, first, second = self._cumulants(theta)
            step = (first - mu) / second
            candidate = theta - step
            if not (lower <= candidate <= upper):
                break
            theta = candidate
        return theta

    def mean_inverse_array(self, mu: np.ndarray) -> np.ndarray:
        """Elementwise mean_inverse; closed-form families vectorize this."""
        flat = np.asarray(mu, dtype=float).ravel()
        return np.array([self.mean_inverse(float(m)) for m in flat]).reshape(np.shape(mu))

    def _bracket(self, mu: float) -> Tuple[float, float]:
        start = 0.5 * (self.probe_range[0] + self.probe_range[1])
        if not self.theta_interval.contains(start):
            start = self.probe_range[0]
        first = self._cumulants(start)[1]
        if first == mu:
            return start, start
        moving_up = first < mu
        edge = self.theta_interval.upper if moving_up else self.theta_interval.lower
        anchor = start
        for step in range(1, 80):
            if math.isfinite(edge):
                probe = edge - (edge - start) * 0.5 ** step
            else:
                probe = start + (2.0 ** step if moving_up else -(2.0 ** step))
            value = self._cumulants(probe)[1]
            if (value >= mu) == moving_up:
                return (anchor, probe) if moving_up else (probe, anchor)
            anchor = probe
        raise MeanOutOfDomain(
            f"could not bracket μ = {mu} inside Θ for {self.label}",
            {"family": self.label, "mu": mu},
        )

    # tilted law

    @abstractmethod
    def tilted(self, theta: float, x: float) -> float:
        """pmf or pdf of F_θ at x."""

    def sample(self, theta: float, rng_seed: int, count: int) -> np.ndarray:
        """``count`` i.i.d. draws from F_θ using a generator seeded with ``rng_seed``."""
        self.check_theta(theta)
        rng = np.random.default_rng(rng_seed)
        return self.draw(rng, np.full(count, float(theta)))

    def draw(self, rng: np.random.Generator, theta: np.ndarray) -> np.ndarray:
        """One draw from F_θ per entry of ``theta``."""
        raise SamplerUnavailable(
            f"no sampler is registered for {self.label}", {"family": self.label}
        )

    @property
    def has_sampler(self) -> bool:
        return type(self).draw is not Nef.draw


class AtomicNef(Nef):
    """Basis with atoms β_n on ℕ.

    Subclasses provide ``log_weights`` (vectorized doubles, −inf for empty
    atoms) and ``exact_weights`` (mpmath numbers of a caller supplied
    context) for the extended-precision coefficient pipelines.
    """

    kind = BasisKind.ATOMS
    support_size: Optional[int] = None
    start_terms = 64
    max_terms = 1 << 20
    tail_ratio = 1e-16

    @abstractmethod
    def log_weights(self, n: np.ndarray) -> np.ndarray:
        """log β_n."""

    @abstractmethod
    def exact_weights(self, ctx: MPContext, order: int) -> List:
        """β_0..β_order as numbers of ``ctx``."""

    def weights(self, order: int) -> np.ndarray:
        return np.exp(self.log_weights(np.arange(order + 1)))

    def _log_terms(self, theta: float) -> Tuple[np.ndarray, np.ndarray, float]:
        """Support indices, log(β_n e^{nθ}) and the log of their sum."""
        if self.support_size is not None:
            n = np.arange(self.support_size + 1)
            logs = self.log_weights(n) + n * theta
            return n, logs, float(logsumexp(logs))

        size = self.start_terms
        while size <= self.max_terms:
            n = np.arange(size)
            logs = self.log_weights(n) + n * theta
            total = float(logsumexp(logs))
            finite = np.flatnonzero(np.isfinite(logs))
            if len(finite) >= 16:
                last, earlier = finite[-1], finite[-9]
                log_ratio = (logs[last] - logs[earlier]) / (last - earlier)
                if log_ratio < 0:
                    ratio = math.exp(log_ratio)
                    log_tail = logs[last] + math.log(ratio / (1.0 - ratio))
                    if log_tail - total < math.log(self.tail_ratio):
                        return n, logs, total
            size *= 2
        raise NonConvergent(
            f"atom sum for {self.label} did not converge at θ = {theta}",
            {"family": self.label, "theta": theta, "terms": self.max_terms},
        )

    def tilted_pmf(self, theta: float) -> Tuple[np.ndarray, np.ndarray]:
        """Support and probabilities of F_θ over the truncated support."""
        self.check_theta(theta)
        n, logs, total = self._log_terms(theta)
        return n, np.exp(logs - total)

    def expect(self, fn: Callable[[np.ndarray], np.ndarray], theta: float, order: Optional[int] = None) -> Tuple[float, float]:
        """E_θ[fn] by direct summation and the tilted mass left beyond ``order``."""
        n, probs = self.tilted_pmf(theta)
        if order is not None and order < n[-1]:
            tail = float(probs[order + 1:].sum())
            n, probs = n[:order + 1], probs[:order + 1]
        else:
            tail = 0.0
        return float(np.dot(fn(n), probs)), tail

    def _cumulants(self, theta: float) -> Cumulants:
        n, logs, total = self._log_terms(theta)
        probs = np.exp(logs - total)
        mean = float(np.dot(n, probs))
        var = float(np.dot((n - mean) ** 2, probs))
        return total, mean, var

    def tilted(self, theta: float, x: float) -> float:
        self.check_theta(theta)
        if x < 0 or x != int(x):
            return 0.0
        kappa = self._cumulants(theta)[0]
        return float(np.exp(self.log_weights(np.array([int(x)]))[0] + x * theta - kappa))

    def draw(self, rng: np.random.Generator, theta: np.ndarray) -> np.ndarray:
        """Inverse CDF over the truncated support, one table per distinct θ."""
        theta = np.asarray(theta, dtype=float)
        out = np.empty(theta.shape, dtype=float)
        uniforms = rng.random(theta.shape)
        for value in np.unique(theta):
            mask = theta == value
            n, probs = self.tilted_pmf(float(value))
            cdf = np.cumsum(probs)
            index = np.searchsorted(cdf, uniforms[mask] * cdf[-1], side="right")
            out[mask] = n[np.minimum(index, len(n) - 1)]
        return out


class DensityNef(Nef):
    """Basis with a density on (support_lower, support_upper), plus an optional atom at 0."""

    kind = BasisKind.DENSITY
    atom_at_zero: float = 0.0
    quad_rtol = 1e-11
    accept_rtol = 1e-8

    def __init__(
        self,
        label: str,
        theta_interval: ThetaInterval,
        probe_range: Tuple[float, float],
        support: Tuple[float, float],
        mean_domain: Tuple[float, float] = (-math.inf, math.inf),
        variance_poly: Optional[Sequence[float]] = None,
    ):
        super().__init__(label, theta_interval, probe_range, mean_domain, variance_poly)
        self.support = support

    @abstractmethod
    def log_density(self, x: float) -> float:
        """log of the basis density (continuous part) at x."""

    def density(self, x: float) -> float:
        return math.exp(self.log_density(x))

    def _scale_hint(self, theta: float) -> Tuple[float, float]:
        exact = self.exact_cumulants(theta)
        if exact is not None:
            return exact[1], math.sqrt(exact[2])
        lower, upper = self.support
        if math.isfinite(lower):
            return lower + 1.0, 1.0
        return 0.0, 1.0

    def _breakpoints(self, center: float, spread: float) -> List[float]:
        lower, upper = self.support
        offsets = (-8.0, -2.0, 0.0, 2.0, 8.0, 40.0)
        points = [center + k * spread for k in offsets]
        inside = sorted({p for p in points if lower < p < upper})
        if not inside:
            inside = [center]
        return [lower] + inside + [upper]

    def _integrate(self, fn: Callable[[float], float], edges: List[float]) -> Tuple[float, float]:
        value = 0.0
        error = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            piece, piece_err = integrate.quad(
                fn, a, b, epsabs=0.0, epsrel=self.quad_rtol, limit=400
            )
            value += piece
            error += piece_err
        return value, error

    def _cumulants(self, theta: float) -> Cumulants:
        center, spread = self._scale_hint(theta)
        edges = self._breakpoints(center, spread)
        shift = theta * center + self.log_density(center)

        def weight(x: float) -> float:
            return math.exp(theta * x + self.log_density(x) - shift)

        mass, mass_err = self._integrate(weight, edges)
        atom = self.atom_at_zero * math.exp(-shift) if self.atom_at_zero else 0.0
        total = mass + atom
        if not (total > 0) or mass_err > self.accept_rtol * total:
            raise NonConvergent(
                f"Laplace quadrature for {self.label} at θ = {theta} did not converge",
                {"family": self.label, "theta": theta, "abserr": mass_err, "value": total},
            )
        first, _ = self._integrate(lambda x: x * weight(x), edges)
        mean = first / total
        second, second_err = self._integrate(lambda x: (x - mean) ** 2 * weight(x), edges)
        second += atom * mean ** 2
        if second_err > self.accept_rtol * second:
            raise NonConvergent(
                f"variance quadrature for {self.label} at θ = {theta} did not converge",
                {"family": self.label, "theta": theta, "abserr": second_err, "value": second},
            )
        return shift + math.log(total), mean, second / total

    def expect(self, fn: Callable[[float], float], theta: float) -> Tuple[float, float]:
        """E_θ[fn] by quadrature of fn·f_θ (atom included) and the quadrature error estimate."""
        self.check_theta(theta)
        kappa = self._cumulants(theta)[0]
        center, spread = self._scale_hint(theta)
        edges = self._breakpoints(center, spread)
        value, error = self._integrate(
            lambda x: fn(x) * math.exp(theta * x + self.log_density(x) - kappa), edges
        )
        if self.atom_at_zero:
            value += fn(0.0) * self.atom_at_zero * math.exp(-kappa)
        return value, error

    def tilted(self, theta: float, x: float) -> float:
        self.check_theta(theta)
        lower, upper = self.support
        if not (lower < x < upper):
            return 0.0
        kappa = self._cumulants(theta)[0]
        return math.exp(theta * x + self.log_density(x) - kappa)
