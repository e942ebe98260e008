"""Reduction functions for infinitely divisible NEFs on ℕ.

Two independent routes produce the induced measure ρ with
κ″(θ) = Σ ρ_n e^{nθ}:

* cumulant route: c = log(Σ β_n z^n) as Taylor coefficients, ρ_n = n²·c_n;
* generator route: for h(w) = w·g(h(w)), ρ_n = [w^n] H_ρ(h(w)) with
  H_ρ(x) = x(1 − x g′/g)^{−3}(g′/g + x g″/g − x(g′/g)²).

α = β∗ρ is a finite convolution and φ(n) = α_n/β_n. φ is badly conditioned
in the weights, so the pipelines run on mpmath series with enough digits
for the requested order and export doubles at the end.
"""

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
from mpmath.ctx_mp import MPContext

from nef_toolkit.core.nef import AtomicNef, Nef
from nef_toolkit.core.series import (
    TruncatedSeries,
    arcsin,
    cauchy_product,
    compose,
    derivative,
    exp_series,
    exponential,
    from_fractions,
    geometric,
    lagrange_invert,
    log_series,
    make_context,
    power,
    reciprocal,
    shift,
)
from nef_toolkit.errors import (
    AbsoluteContinuityViolated,
    DegenerateMeasure,
    NotInfinitelyDivisible,
    UnknownFamily,
)
from nef_toolkit.infrastructure.logging import get_logger
from nef_toolkit.settings import settings

from .functions import AtomTableRf


logger = get_logger(__name__)

NEGATIVE_C_TOLERANCE = 1e-8

WeightsLike = Union[TruncatedSeries, Sequence]


def pipeline_dps(order: int) -> int:
    """Working digits for an ℕ pipeline of the given order."""
    return max(settings.series_dps, order // 2 + 30)


def _as_series(values: WeightsLike) -> TruncatedSeries:
    return values if isinstance(values, TruncatedSeries) else TruncatedSeries(list(values))


def cumulant_coeffs(beta: WeightsLike, order: Optional[int] = None) -> TruncatedSeries:
    """c_0..c_N: Taylor coefficients of ψ(z) = log Σ β_n z^n."""
    series = _as_series(beta)
    if order is not None:
        series = series.truncate(order)
    positive = sum(1 for b in series if b > 0)
    if positive < 2:
        raise DegenerateMeasure(
            "basis concentrated on a single point is not a NEF basis",
            {"positive_atoms": positive},
        )
    c = log_series(series)
    negative = [
        (n, float(c[n])) for n in range(1, c.order + 1) if c[n] < -NEGATIVE_C_TOLERANCE
    ]
    if negative:
        n, value = negative[0]
        raise NotInfinitelyDivisible(
            f"cumulant coefficient c_{n} = {value:.3g} is negative",
            {"n": n, "c_n": value, "violations": len(negative)},
        )
    return c


def rho_from_c(c: TruncatedSeries) -> TruncatedSeries:
    """ρ_n = n²·c_n, ρ_0 = 0."""
    squares = np.arange(c.order + 1) ** 2
    values = c.coeffs * squares
    values[0] = c[0] * 0
    return TruncatedSeries(values)


def alpha_convolve(beta: WeightsLike, rho: WeightsLike) -> TruncatedSeries:
    """α_n = Σ_k β_{n−k}·ρ_k."""
    return cauchy_product(_as_series(beta), _as_series(rho))


@dataclass(frozen=True)
class DiscreteIdFamily:
    """Coefficient tables of an i.d. family on ℕ.

    ``exact_*`` keep the working-precision series; ``beta``, ``c``, ``rho``
    and ``alpha`` are their double exports.
    """

    label: str
    exact_beta: TruncatedSeries
    exact_c: TruncatedSeries
    exact_rho: TruncatedSeries
    exact_alpha: TruncatedSeries
    generator: Optional[TruncatedSeries] = None

    @property
    def order(self) -> int:
        return self.exact_beta.order

    @property
    def beta(self) -> np.ndarray:
        return self.exact_beta.to_float()

    @property
    def c(self) -> np.ndarray:
        return self.exact_c.to_float()

    @property
    def rho(self) -> np.ndarray:
        return self.exact_rho.to_float()

    @property
    def alpha(self) -> np.ndarray:
        return self.exact_alpha.to_float()

    def rows(self) -> List[Dict[str, float]]:
        """One row per n with the full pipeline (n, beta, c, rho, alpha, phi)."""
        phi = reduction_fn(self).values
        return [
            {
                "n": n,
                "beta": float(self.beta[n]),
                "c": float(self.c[n]),
                "rho": float(self.rho[n]),
                "alpha": float(self.alpha[n]),
                "phi": float(phi[n]),
            }
            for n in range(self.order + 1)
        ]


def _pipeline(label: str, beta: TruncatedSeries, generator: Optional[TruncatedSeries] = None) -> DiscreteIdFamily:
    c = cumulant_coeffs(beta)
    rho = rho_from_c(c)
    alpha = alpha_convolve(beta, rho)
    return DiscreteIdFamily(label, beta, c, rho, alpha, generator)


def build_family(nef: AtomicNef, order: Optional[int] = None) -> DiscreteIdFamily:
    """Run the cumulant pipeline on the exact weights of a registered family."""
    order = order or settings.family_order
    ctx = make_context(pipeline_dps(order))
    logger.debug(f"Building {nef.label} pipeline to order {order} at {ctx.dps} digits")
    beta = TruncatedSeries(nef.exact_weights(ctx, order))
    return _pipeline(nef.label, beta)


def reduction_fn(family: DiscreteIdFamily) -> AtomTableRf:
    """φ(n) = α_n/β_n where β_n > 0."""
    beta, alpha = family.exact_beta, family.exact_alpha
    scale = max(abs(a) for a in alpha) or 1
    values = np.full(family.order + 1, np.nan)
    for n in range(family.order + 1):
        if beta[n] > 0:
            values[n] = float(alpha[n] / beta[n])
        elif abs(alpha[n]) > 1e-12 * scale:
            raise AbsoluteContinuityViolated(
                f"α charges n = {n} where β has no atom",
                {"n": n, "alpha_n": float(alpha[n])},
            )
    return AtomTableRf(family.label, values, {"route": "cumulant", "order": family.order})


def _pad(series: TruncatedSeries, order: int) -> TruncatedSeries:
    zero = series[0] * 0
    extra = np.empty(order - series.order, dtype=series.coeffs.dtype)
    extra[:] = zero
    return TruncatedSeries(np.concatenate((series.coeffs, extra)))


def _check_generator(g: TruncatedSeries) -> None:
    if any(coefficient < 0 for coefficient in g):
        raise ValueError("Lagrange generator coefficients must be non-negative")


def lagrange_family(g: TruncatedSeries, order: int, label: str = "lagrange") -> DiscreteIdFamily:
    """β_n = [w^n] h(w)/w for h = w·g(h), then the cumulant pipeline."""
    _check_generator(g)
    h = lagrange_invert(g, order + 1)
    beta = TruncatedSeries(h.coeffs[1:])
    return _pipeline(label, beta, generator=g)


def rho_via_generator(g: TruncatedSeries, order: int) -> TruncatedSeries:
    """ρ_0..ρ_N as [w^n] H_ρ(h(w)).

    ρ_n only depends on g_0..g_n, so g is zero padded by two orders to keep
    every intermediate product exact through order N.
    """
    _check_generator(g)
    if g.order < order:
        raise ValueError(f"generator of order {g.order} cannot determine ρ to order {order}")
    g = _pad(g.truncate(order), order + 2)
    inverse = reciprocal(g).truncate(order + 1)
    first = cauchy_product(derivative(g), inverse)            # g′/g
    second = cauchy_product(derivative(derivative(g)), inverse.truncate(order))  # g″/g
    first = first.truncate(order)
    x_first = shift(first)
    base = power(1 - x_first, -3)
    bracket = first + shift(second) - shift(cauchy_product(first, first))
    h_rho = shift(cauchy_product(base, bracket))
    h = lagrange_invert(g, order)
    return compose(h_rho, h)


GENERATORS = {
    "exp": "e^z (Abel)",
    "geometric": "1/(1−z) (Takács)",
    "exp-arcsin": "exp(arcsin z) (large arcsine)",
    "one-plus": "1+z",
}


def generator_series(name: str, order: int, ctx: Optional[MPContext] = None) -> TruncatedSeries:
    """Named Lagrange generator to order N."""
    if name == "exp":
        return exponential(order, ctx)
    if name == "geometric":
        return geometric(order, ctx)
    if name == "exp-arcsin":
        return exp_series(arcsin(order, ctx))
    if name == "one-plus":
        return from_fractions([1, 1] + [0] * (order - 1), ctx)
    raise UnknownFamily(f"unknown generator {name!r}", {"generator": name, "known": list(GENERATORS)})


def vf_parametric_check(nef: Nef, v: Sequence[float], thetas: Iterable[float]) -> float:
    """max over θ of |κ″(θ) − v(κ′(θ))| for the polynomial v (increasing powers)."""
    worst = 0.0
    for theta in thetas:
        _, first, second = nef.cumulant_derivs(float(theta))
        deviation = abs(second - float(np.polynomial.polynomial.polyval(first, v)))
        worst = max(worst, deviation)
    return worst


def generating_identity_gap(family: DiscreteIdFamily, nef: AtomicNef, theta: float) -> float:
    """Relative gap between Σ α_n e^{nθ} and L(θ)κ″(θ)."""
    kappa, _, second = nef.cumulant_derivs(theta)
    n = np.arange(family.order + 1)
    lhs = float(np.dot(family.alpha, np.exp(n * theta)))
    rhs = math.exp(kappa) * second
    return abs(lhs - rhs) / rhs
