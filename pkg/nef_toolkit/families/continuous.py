"""Families with a basis density.

Closed-form cumulants are kept next to each density so the quadrature in
``DensityNef`` can be checked against them and so ``mean_inverse`` stays
exact. The power variance families are parametrised by ``PvfSpec``; all of
their powers of θ go through s = −θ > 0 and real arithmetic.
"""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Tuple

import numpy as np
from scipy import integrate, optimize
from scipy.special import gammaln, loggamma, logsumexp, xlogy

from nef_toolkit.core.nef import DensityNef, ThetaInterval
from nef_toolkit.errors import RfUnavailable, SeriesDiverged


LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class NormalFamily(DensityNef):
    """Standard normal basis, V(u) = 1."""

    def __init__(self):
        super().__init__(
            "normal",
            ThetaInterval(),
            probe_range=(-3.0, 3.0),
            support=(-math.inf, math.inf),
            variance_poly=(1.0,),
        )

    def log_density(self, x):
        return -0.5 * x * x - LOG_SQRT_2PI

    def exact_cumulants(self, theta):
        return 0.5 * theta * theta, theta, 1.0

    def mean_inverse(self, mu):
        self.check_mean(mu)
        return float(mu)

    def mean_inverse_array(self, mu):
        return np.asarray(mu, dtype=float)

    def draw(self, rng, theta):
        return rng.normal(theta, 1.0)


class GammaFamily(DensityNef):
    """Gamma(m, 1) basis, V(u) = u²/m."""

    def __init__(self, m: float = 2.0):
        if m <= 0:
            raise ValueError("gamma needs m > 0")
        self.m = m
        super().__init__(
            f"gamma({m:g})",
            ThetaInterval(upper=1.0),
            probe_range=(-3.0, 0.8),
            support=(0.0, math.inf),
            mean_domain=(0.0, math.inf),
            variance_poly=(0.0, 0.0, 1.0 / m),
        )

    def log_density(self, x):
        return float(xlogy(self.m - 1.0, x)) - x - float(gammaln(self.m))

    def exact_cumulants(self, theta):
        rest = 1.0 - theta
        return -self.m * math.log(rest), self.m / rest, self.m / (rest * rest)

    def mean_inverse(self, mu):
        self.check_mean(mu)
        return 1.0 - self.m / mu

    def mean_inverse_array(self, mu):
        return 1.0 - self.m / np.asarray(mu, dtype=float)

    def draw(self, rng, theta):
        return rng.gamma(self.m, 1.0 / (1.0 - theta))


class GhsFamily(DensityNef):
    """Generalized hyperbolic secant basis, L(θ) = (cos θ)^{−m}, V(u) = m + u²/m."""

    def __init__(self, m: float = 1.0):
        if m <= 0:
            raise ValueError("ghs needs m > 0")
        self.m = m
        self._log_norm = (m - 2.0) * math.log(2.0) - math.log(math.pi) - float(gammaln(m))
        super().__init__(
            f"ghs({m:g})",
            ThetaInterval(-math.pi / 2, math.pi / 2),
            probe_range=(-1.2, 1.2),
            support=(-math.inf, math.inf),
            variance_poly=(m, 0.0, 1.0 / m),
        )

    def log_density(self, x):
        return self._log_norm + 2.0 * float(np.real(loggamma(0.5 * (self.m + 1j * x))))

    def exact_cumulants(self, theta):
        cos = math.cos(theta)
        return -self.m * math.log(cos), self.m * math.tan(theta), self.m / (cos * cos)

    def mean_inverse(self, mu):
        self.check_mean(mu)
        return math.atan(mu / self.m)

    def mean_inverse_array(self, mu):
        return np.arctan(np.asarray(mu, dtype=float) / self.m)


class InverseGaussianFamily(DensityNef):
    """Basis (2π)^{−1/2} x^{−3/2} e^{−1/(2x)}, L(θ) = exp(−√(−2θ)), V(u) = u³."""

    def __init__(self):
        super().__init__(
            "inverse-gaussian",
            ThetaInterval(upper=0.0),
            probe_range=(-5.0, -0.1),
            support=(0.0, math.inf),
            mean_domain=(0.0, math.inf),
            variance_poly=(0.0, 0.0, 0.0, 1.0),
        )

    def log_density(self, x):
        if x <= 0:
            return -math.inf
        return -LOG_SQRT_2PI - 1.5 * math.log(x) - 0.5 / x

    def exact_cumulants(self, theta):
        root = math.sqrt(-2.0 * theta)
        return -root, 1.0 / root, root ** -3

    def mean_inverse(self, mu):
        self.check_mean(mu)
        return -0.5 / (mu * mu)

    def mean_inverse_array(self, mu):
        return -0.5 / np.asarray(mu, dtype=float) ** 2

    def draw(self, rng, theta):
        return rng.wald(1.0 / np.sqrt(-2.0 * theta), 1.0)


def ressel_s(theta: float) -> float:
    """s > 0 solving s − log(1+s) = −θ."""
    target = -theta
    upper = 2.0 * math.sqrt(2.0 * target) + 2.0 * target + 1.0
    return optimize.brentq(lambda s: s - math.log1p(s) - target, 0.0, upper, xtol=1e-300, rtol=1e-15)


class ResselFamily(DensityNef):
    """Basis x^x e^{−x}/Γ(x+2) on (0, ∞), V(u) = u²(1+u)."""

    def __init__(self):
        super().__init__(
            "ressel",
            ThetaInterval(upper=0.0),
            probe_range=(-3.0, -0.5),
            support=(0.0, math.inf),
            mean_domain=(0.0, math.inf),
            variance_poly=(0.0, 0.0, 1.0, 1.0),
        )

    def log_density(self, x):
        return float(xlogy(x, x)) - x - float(gammaln(x + 2.0))

    def exact_cumulants(self, theta):
        s = ressel_s(theta)
        return -math.log1p(s), 1.0 / s, (1.0 + s) / s ** 3

    def mean_inverse(self, mu):
        self.check_mean(mu)
        s = 1.0 / mu
        return -(s - math.log1p(s))


def ressel_convolution_power(y: np.ndarray, m: int) -> np.ndarray:
    """Density of β^{*m}: m·y^{y+m−1} e^{−y} / Γ(y+m+1)."""
    y = np.asarray(y, dtype=float)
    log_value = math.log(m) + xlogy(y + m - 1.0, y) - y - gammaln(y + m + 1.0)
    return np.exp(log_value)


SERIES_TERMS = 400
SERIES_RTOL = 1e-14
LOSS_LIMIT = 1e8


@dataclass(frozen=True)
class PvfSpec:
    """Power variance function V(u) = a·u^r.

    Case 1 is r ∈ (1, 2) (γ < 0, compound Poisson with an atom at 0); case 2
    is r > 2 (0 < γ < 1, positive stable). Integer r belongs to the discrete
    and quadratic paths.
    """

    r: float
    a: float = 1.0

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("PVF scale a must be positive")
        if not (1.0 < self.r < 2.0 or self.r > 2.0) or float(self.r).is_integer():
            raise RfUnavailable(
                f"power variance exponent r = {self.r} is not handled by the PVF path",
                {"r": self.r},
            )

    @property
    def gamma(self) -> float:
        return (2.0 - self.r) / (1.0 - self.r)

    @property
    def case(self) -> int:
        return 1 if self.r < 2.0 else 2

    @property
    def sign(self) -> float:
        return 1.0 if self.case == 1 else -1.0

    @property
    def rate(self) -> float:
        """λ with κ(θ) = sign·λ·s^γ, s = −θ, before scaling."""
        return (self.r - 1.0) ** self.gamma / abs(2.0 - self.r)

    @property
    def scale(self) -> float:
        return self.a ** (1.0 / (2.0 - self.r))

    @property
    def c0(self) -> complex:
        """(2−r)^{−1}(1−r)^γ on the principal branch."""
        return complex(1.0 - self.r) ** self.gamma / (2.0 - self.r)

    @property
    def c2(self) -> complex:
        """(1−r)^{γ−2} on the principal branch."""
        return complex(1.0 - self.r) ** (self.gamma - 2.0)

    @property
    def a_hat(self) -> float:
        """γ^{−1/γ}(1−γ)^{1/γ−1}, equal to λ^{1/γ} in case 2."""
        g = self.gamma
        if self.case != 2:
            raise RfUnavailable("â is defined for r > 2 only", {"r": self.r})
        return g ** (-1.0 / g) * (1.0 - g) ** (1.0 / g - 1.0)

    @property
    def rho_coefficient(self) -> float:
        """κ″ = rho_coefficient · s^{γ−2} before scaling."""
        return self.sign * self.rate * self.gamma * (self.gamma - 1.0)

    def cumulants(self, theta: float) -> Tuple[float, float, float]:
        c = self.scale
        s = -c * theta
        g = self.gamma
        kappa = self.sign * self.rate * s ** g
        mean = -self.sign * self.rate * g * s ** (g - 1.0)
        var = self.rho_coefficient * s ** (g - 2.0)
        return kappa, c * mean, c * c * var

    def theta_of_mean(self, mu):
        c = self.scale
        base = np.asarray(mu, dtype=float) / c / (-self.sign * self.rate * self.gamma)
        return -(base ** (1.0 / (self.gamma - 1.0))) / c

    # unscaled series in y = x / c

    def _case1_log_q(self, y: np.ndarray) -> np.ndarray:
        g = -self.gamma
        n = np.arange(1, SERIES_TERMS + 1)
        log_terms = (
            n * math.log(self.rate) + np.outer(np.log(y), n * g - 1.0)
            - gammaln(n + 1.0) - gammaln(n * g)
        )
        return self._positive_sum(log_terms, y)

    def _case1_log_alpha(self, y: np.ndarray) -> np.ndarray:
        g = -self.gamma
        n = np.arange(0, SERIES_TERMS)
        log_terms = (
            n * math.log(self.rate) + np.outer(np.log(y), (n + 1.0) * g + 1.0)
            - gammaln(n + 1.0) - gammaln((n + 1.0) * g + 2.0)
        )
        return math.log(self.rho_coefficient) + self._positive_sum(log_terms, y)

    @staticmethod
    def _positive_sum(log_terms: np.ndarray, y: np.ndarray) -> np.ndarray:
        total = logsumexp(log_terms, axis=1)
        unconverged = log_terms[:, -1] - total > math.log(SERIES_RTOL)
        if np.any(unconverged):
            bad = float(y[np.argmax(unconverged)])
            raise SeriesDiverged(
                f"density series did not converge within {SERIES_TERMS} terms at x = {bad:g}",
                {"x": bad, "terms": SERIES_TERMS},
            )
        return total

    def _case2_series(self, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        g = self.gamma
        n = np.arange(1, SERIES_TERMS + 1)
        sines = np.sin(n * math.pi * g)
        signs = np.where(n % 2 == 1, 1.0, -1.0) * np.sign(sines)
        log_terms = (
            n * math.log(self.rate) + gammaln(n * g + 1.0) - gammaln(n + 1.0)
            + np.log(np.abs(sines) + 1e-300) - np.outer(np.log(y), n * g + 1.0)
        )
        peak = log_terms.max(axis=1, keepdims=True)
        scaled = np.exp(log_terms - peak)
        signed = (scaled * signs).sum(axis=1)
        absolute = scaled.sum(axis=1)
        with np.errstate(divide="ignore"):
            loss = absolute / np.abs(signed)
        # terms still growing at the last index: the partial sum means nothing
        loss = np.where(scaled[:, -1] > SERIES_RTOL * absolute, np.inf, loss)
        value = signed * np.exp(peak[:, 0]) / math.pi
        return value, loss

    def _case2_integral(self, y: np.ndarray) -> np.ndarray:
        """Stable density from its integral over φ ∈ (0, π); no cancellation near 0.

        With S = y/â and t = S^{−γ/(1−γ)}, the density of S is
        γ/(1−γ)·S^{−1/(1−γ)}·π⁻¹∫ A(φ)e^{−tA(φ)} dφ where
        A(φ) = (sin^γ(γφ)·sin^{1−γ}((1−γ)φ)/sin φ)^{1/(1−γ)}.
        """
        g = self.gamma
        a_hat = self.a_hat
        power = g / (1.0 - g)
        values = np.zeros_like(y)
        for i, point in enumerate(y):
            s = point / a_hat
            t = s ** (-power)

            def integrand(phi: float) -> float:
                log_a = (
                    g * math.log(math.sin(g * phi)) + (1.0 - g) * math.log(math.sin((1.0 - g) * phi))
                    - math.log(math.sin(phi))
                ) / (1.0 - g)
                a = math.exp(log_a)
                return a * math.exp(-a * t)

            total, _ = integrate.quad(integrand, 0.0, math.pi, limit=200)
            values[i] = power * s ** (-1.0 / (1.0 - g)) * total / (math.pi * a_hat)
        return values

    def _case2_rho(self, y: np.ndarray) -> np.ndarray:
        g = self.gamma
        return self.rho_coefficient * y ** (1.0 - g) / math.exp(gammaln(2.0 - g))

    def _case1_rho(self, y: np.ndarray) -> np.ndarray:
        g = -self.gamma
        return self.rho_coefficient * y ** (g + 1.0) / math.exp(gammaln(g + 2.0))

    @cached_property
    def reliable_cutoff(self) -> float:
        """Smallest x (scaled) where the case 2 series keeps its digits; the integral takes over below."""
        if self.case != 2:
            return 0.0
        lower, upper = math.log(1e-8), math.log(50.0)

        def reliable(log_y: float) -> bool:
            return bool(self._case2_series(np.array([math.exp(log_y)]))[1][0] <= LOSS_LIMIT)

        if not reliable(upper):
            raise SeriesDiverged(
                f"stable density series is unreliable even at x = {self.scale * 50.0:g}",
                {"r": self.r, "a": self.a},
            )
        if reliable(lower):
            return self.scale * math.exp(lower)
        for _ in range(60):
            middle = 0.5 * (lower + upper)
            if reliable(middle):
                upper = middle
            else:
                lower = middle
        return self.scale * math.exp(upper)

    # scaled densities

    def beta_density(self, x) -> np.ndarray:
        """Continuous part of β at x > 0 (case 1 also carries a unit atom at 0)."""
        c = self.scale
        y = np.atleast_1d(np.asarray(x, dtype=float)) / c
        if self.case == 1:
            return np.exp(self._case1_log_q(y)) / c
        value = np.zeros_like(y)
        series = y >= self.reliable_cutoff / c
        if series.any():
            value[series] = self._case2_series(y[series])[0]
        inner = ~series & (y > 0)
        if inner.any():
            value[inner] = self._case2_integral(y[inner])
        return value / c

    def alpha_density(self, x) -> np.ndarray:
        """α = β∗ρ in closed series form (case 1 only)."""
        if self.case != 1:
            raise RfUnavailable("closed α series exists for 1 < r < 2 only", {"r": self.r})
        c = self.scale
        y = np.atleast_1d(np.asarray(x, dtype=float)) / c
        return c * np.exp(self._case1_log_alpha(y))

    def rho_density(self, x) -> np.ndarray:
        c = self.scale
        y = np.atleast_1d(np.asarray(x, dtype=float)) / c
        values = self._case1_rho(y) if self.case == 1 else self._case2_rho(y)
        return c * values

    def log_phi(self, x) -> np.ndarray:
        """log φ(x) = log α(x) − log β(x) for case 1, x > 0."""
        c = self.scale
        y = np.atleast_1d(np.asarray(x, dtype=float)) / c
        return 2.0 * math.log(c) + self._case1_log_alpha(y) - self._case1_log_q(y)


class PvfFamily(DensityNef):
    """NEF with V(u) = a·u^r for non-integer r > 1."""

    def __init__(self, spec: PvfSpec):
        self.spec = spec
        self.atom_at_zero = 1.0 if spec.case == 1 else 0.0
        probe = (-3.0, -0.5) if spec.case == 1 else (-4.0, -1.0)
        super().__init__(
            f"pvf({spec.r:g})" if spec.a == 1.0 else f"pvf({spec.r:g},{spec.a:g})",
            ThetaInterval(upper=0.0),
            probe_range=probe,
            support=(0.0, math.inf),
            mean_domain=(0.0, math.inf),
        )

    def variance_function(self, mu):
        return self.spec.a * mu ** self.spec.r

    def log_density(self, x):
        if x <= 0:
            return -math.inf
        if self.spec.case == 1:
            return float(self.spec._case1_log_q(np.array([x / self.spec.scale]))[0]) - math.log(self.spec.scale)
        value = float(self.spec.beta_density(x)[0])
        return math.log(value) if value > 0 else -math.inf

    def _breakpoints(self, center, spread):
        # the density series only converge on a bounded stretch
        cutoff = self.spec.reliable_cutoff
        upper = center + 80.0 * spread
        inside = [p for p in super()._breakpoints(center, spread)[1:-1] if cutoff < p < upper]
        return [0.0] + ([cutoff] if cutoff > 0 else []) + inside + [upper]

    def exact_cumulants(self, theta):
        return self.spec.cumulants(theta)

    def mean_inverse(self, mu):
        self.check_mean(mu)
        return float(self.spec.theta_of_mean(mu))

    def mean_inverse_array(self, mu):
        return self.spec.theta_of_mean(mu)

    @property
    def has_sampler(self) -> bool:
        return self.spec.case == 1

    def draw(self, rng, theta):
        """Poisson number of gamma jumps; case 2 (stable law) has no sampler."""
        if self.spec.case != 1:
            return super().draw(rng, theta)
        spec = self.spec
        s = -spec.scale * np.asarray(theta, dtype=float)
        counts = rng.poisson(spec.rate * s ** spec.gamma)
        shape = counts * (-spec.gamma)
        draws = np.zeros(s.shape)
        positive = counts > 0
        draws[positive] = rng.gamma(shape[positive], 1.0 / s[positive])
        return spec.scale * draws
