"""Reduction functions for quadratic, inverse Gaussian, power and Ressel variance families.

Closed forms taken from the literature are treated as candidates: each one
is pushed through ``laplace_oracle`` against the exact transform of the
measure it claims to be before a reduction function is built on it.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel
from scipy import signal
from scipy.special import erfc, erfcx, gammaln

from nef_toolkit.errors import BernoulliNoRf, FormulaInvalid, NefToolkitError, TailTooHeavy
from nef_toolkit.families.continuous import (
    InverseGaussianFamily,
    PvfSpec,
    ResselFamily,
    ressel_convolution_power,
)
from nef_toolkit.infrastructure.logging import get_logger

from .functions import ClosedFormRf, DensityRatioRf, GridDensity, GridRatioRf
from .oracle import laplace_oracle


logger = get_logger(__name__)


# quadratic variance functions

@dataclass(frozen=True)
class QvfSpec:
    """V(u) = a0 + a1·u + a2·u²; Fractions keep the coefficients exact."""

    a0: Real = 0
    a1: Real = 0
    a2: Real = 0
    label: str = "qvf"

    def phi_coefficients(self) -> Tuple[Real, Real, Real]:
        """(a0, a1, a2)/(1 + a2)."""
        if self.a2 == -1:
            raise BernoulliNoRf(
                f"{self.label}: a2 = −1 is the Bernoulli case, which has no reduction function",
                {"a2": float(self.a2)},
            )
        denominator = 1 + self.a2
        return self.a0 / denominator, self.a1 / denominator, self.a2 / denominator


def qvf_rf(spec: QvfSpec) -> ClosedFormRf:
    """φ(t) = (a0 + a1·t + a2·t²)/(1 + a2)."""
    coefficients = [float(c) for c in spec.phi_coefficients()]
    return ClosedFormRf(
        spec.label,
        coefficients=coefficients,
        provenance={"route": "qvf", "variance": [float(spec.a0), float(spec.a1), float(spec.a2)]},
    )


def table_one(m: Real = 2) -> Dict[str, QvfSpec]:
    """The six quadratic families keyed by their registry names."""
    inverse = Fraction(1, int(m)) if float(m).is_integer() else 1.0 / m
    m = int(m) if float(m).is_integer() else m
    specs = [
        QvfSpec(1, 0, 0, "normal"),
        QvfSpec(0, 1, 0, "poisson"),
        QvfSpec(0, 0, inverse, f"gamma({m:g})"),
        QvfSpec(0, 1, -inverse, f"binomial({m:g})"),
        QvfSpec(0, 1, inverse, f"negbin({m:g})"),
        QvfSpec(m, 0, inverse, f"ghs({m:g})"),
    ]
    return {spec.label: spec for spec in specs}


QVF_FAMILIES = ("normal", "poisson", "gamma", "binomial", "negbin", "ghs")


def qvf_spec_for(base: str, params: Sequence[float]) -> Optional[QvfSpec]:
    """QvfSpec of a registry family, None when its VF is not quadratic."""
    if base not in QVF_FAMILIES:
        return None
    m = params[0] if params else 2
    label = base if base in ("normal", "poisson") else f"{base}({m:g})"
    return table_one(m)[label]


# formula validation reports

class FormulaCheck(BaseModel):
    """Laplace oracle at one θ for one candidate formula."""

    candidate: str
    theta: float
    target: float
    computed: float
    relerr: float
    passed: bool


class FormulaReport(BaseModel):
    """All oracle probes of one candidate."""

    family: str
    candidate: str
    tolerance: float
    checks: List[FormulaCheck]
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(check.passed for check in self.checks)

    @property
    def max_relerr(self) -> float:
        return max((check.relerr for check in self.checks), default=math.inf)

    class Config:
        json_schema_extra = {
            "example": {
                "family": "inverse-gaussian",
                "candidate": "laplace-pair",
                "tolerance": 1e-6,
                "checks": [
                    {"candidate": "laplace-pair", "theta": -0.5, "target": 0.36788,
                     "computed": 0.36788, "relerr": 2e-12, "passed": True}
                ],
                "error": None,
            }
        }


def validate_candidate(
    family: str,
    candidate: str,
    transform: Callable[[float], float],
    target: Callable[[float], float],
    thetas: Sequence[float],
    tolerance: float,
) -> FormulaReport:
    """Run the Laplace oracle on ``transform`` against ``target`` at every θ."""
    checks = []
    try:
        for theta in thetas:
            expected = target(theta)
            computed = transform(theta)
            relerr = abs(computed - expected) / abs(expected)
            checks.append(FormulaCheck(
                candidate=candidate, theta=theta, target=expected, computed=computed,
                relerr=relerr, passed=relerr <= tolerance,
            ))
    except (NefToolkitError, ValueError, OverflowError) as e:
        return FormulaReport(family=family, candidate=candidate, tolerance=tolerance, checks=checks, error=str(e))
    report = FormulaReport(family=family, candidate=candidate, tolerance=tolerance, checks=checks)
    if report.passed:
        logger.debug(f"{family}/{candidate} passed the Laplace oracle, max relerr {report.max_relerr:.2e}")
    else:
        logger.warning(f"{family}/{candidate} failed the Laplace oracle, max relerr {report.max_relerr:.2e}")
    return report


# inverse Gaussian

IG_PROBES = tuple(np.linspace(-5.0, -0.1, 6))


def ig_alpha_printed(x):
    """(2π)^{−1}(√(2π)e^{−1/(2x)} − π x^{−1/2} + π·erf((2x)^{−1/2}))."""
    x = np.asarray(x, dtype=float)
    z = 1.0 / np.sqrt(2.0 * x)
    return (math.sqrt(2.0 * math.pi) * np.exp(-0.5 / x) - math.pi / np.sqrt(x) + math.pi * (1.0 - erfc(z))) / (2.0 * math.pi)


def ig_alpha_laplace_pair(x):
    """α(x) = √(x/2π)e^{−1/(2x)} − ½erfc((2x)^{−1/2}), the integral ½∫₀ˣ y f(y) dy."""
    x = np.asarray(x, dtype=float)
    return np.sqrt(x / (2.0 * math.pi)) * np.exp(-0.5 / x) - 0.5 * erfc(1.0 / np.sqrt(2.0 * x))


def ig_phi_laplace_pair(x):
    """x² − √(π/2)·x^{3/2}·erfcx((2x)^{−1/2}), cancellation free form of α/f."""
    x = np.asarray(x, dtype=float)
    return x * x - math.sqrt(0.5 * math.pi) * x ** 1.5 * erfcx(1.0 / np.sqrt(2.0 * x))


def ig_target(theta: float) -> float:
    """L(θ)κ″(θ) = (−2θ)^{−3/2} e^{−√(−2θ)}."""
    root = math.sqrt(-2.0 * theta)
    return root ** -3 * math.exp(-root)


IG_CANDIDATES: Dict[str, Tuple[Callable, Callable]] = {
    "printed": (ig_alpha_printed, None),
    "laplace-pair": (ig_alpha_laplace_pair, ig_phi_laplace_pair),
}


def ig_reports(tolerance: float = 1e-6, thetas: Sequence[float] = IG_PROBES) -> List[FormulaReport]:
    """Validation report of every inverse Gaussian α candidate."""
    return [
        validate_candidate(
            "inverse-gaussian", name,
            lambda theta, alpha=alpha: laplace_oracle(alpha, theta, rtol=1e-9),
            ig_target, thetas, tolerance,
        )
        for name, (alpha, _) in IG_CANDIDATES.items()
    ]


def ig_rf(tolerance: float = 1e-6) -> DensityRatioRf:
    """φ = α/f over the inverse Gaussian basis, from the first candidate that validates."""
    reports = ig_reports(tolerance)
    family = InverseGaussianFamily()
    for report in reports:
        if not report.passed:
            continue
        alpha, phi = IG_CANDIDATES[report.candidate]
        if phi is None:
            def phi(x, alpha=alpha):
                return alpha(x) / np.exp([family.log_density(v) for v in np.atleast_1d(x)])
        logger.info(f"Inverse Gaussian RF built from candidate {report.candidate}")
        return DensityRatioRf(
            "inverse-gaussian", phi,
            provenance={"route": "density-ratio", "candidate": report.candidate,
                        "reports": [r.model_dump() for r in reports]},
        )
    raise FormulaInvalid(
        "no inverse Gaussian candidate passed the Laplace oracle",
        {"reports": [r.model_dump() for r in reports]},
    )


# power variance functions

PVF_PROBES = 6
PVF_GRID_POINTS = 1 << 13


def _pvf_probe_range(spec: PvfSpec) -> Tuple[float, float]:
    return (-3.0, -0.5) if spec.case == 1 else (-4.0, -1.0)


def _pvf_probes(spec: PvfSpec, count: int = PVF_PROBES) -> List[float]:
    lower, upper = _pvf_probe_range(spec)
    return [float(t) for t in np.linspace(lower, upper, count)]


def pvf_x_max(spec: PvfSpec) -> float:
    """Grid end covering F_θ at the probe θ nearest 0: μ + 12σ, and e^{θx} < e^{−25}."""
    upper = _pvf_probe_range(spec)[1]
    _, mean, var = spec.cumulants(upper)
    return max(mean + 12.0 * math.sqrt(var), 25.0 / abs(upper))


def _pvf_grid(spec: PvfSpec, x_max: Optional[float], points: int) -> np.ndarray:
    return np.linspace(0.0, x_max or pvf_x_max(spec), points)


def _case1_first_cell(spec: PvfSpec, h: float) -> float:
    """Leading term mass of q on [0, h]: λ·(h/c)^g/Γ(g+1)."""
    g = -spec.gamma
    return spec.rate * (h / spec.scale) ** g / math.exp(gammaln(g + 1.0))


def _trapezoid_convolution(a: np.ndarray, b: np.ndarray, h: float) -> np.ndarray:
    """(a∗b)(x_k) ≈ h·Σ_j w_j a_j b_{k−j} with trapezoid end weights."""
    full = signal.fftconvolve(a, b)[:len(a)]
    ends = 0.5 * (a[0] * b + a * b[0])
    ends[0] = a[0] * b[0]
    return h * (full - ends)


def pvf_density(spec: PvfSpec, kind: str = "beta", x_max: Optional[float] = None, points: int = PVF_GRID_POINTS) -> GridDensity:
    """β or α of a power variance family sampled on a uniform grid.

    Case 1 evaluates both series termwise; β carries the unit atom at 0
    and α has none. Case 2 evaluates β from the stable series above its
    reliable cutoff and builds α = β∗ρ by grid convolution.
    """
    if kind not in ("beta", "alpha"):
        raise ValueError(f"kind must be 'beta' or 'alpha', got {kind!r}")
    grid = _pvf_grid(spec, x_max, points)
    h = grid[1] - grid[0]
    inner = grid[1:]
    meta = {"r": spec.r, "a": spec.a, "kind": kind, "case": spec.case}

    if spec.case == 1:
        g = -spec.gamma
        values = np.empty_like(grid)
        if kind == "beta":
            values[1:] = spec.beta_density(inner)
            values[0] = spec.rate / spec.scale if g == 1.0 else 0.0
            tail = _case1_first_cell(spec, h) if g < 1.0 else 0.0
            return GridDensity(grid, values, tail_bound=tail, atom=1.0, meta=meta)
        values[1:] = spec.alpha_density(inner)
        values[0] = 0.0
        return GridDensity(grid, values, tail_bound=0.0, atom=0.0, meta=meta)

    # series above the cutoff, the integral form below it
    beta = np.zeros_like(grid)
    beta[1:] = spec.beta_density(inner)
    beta = np.maximum(beta, 0.0)
    # power tail beyond the grid
    beyond = spec.rate * (grid[-1] / spec.scale) ** (-spec.gamma) / math.exp(gammaln(1.0 - spec.gamma))
    meta["cutoff"] = spec.reliable_cutoff
    if kind == "beta":
        return GridDensity(grid, beta, tail_bound=beyond, meta=meta)
    rho = np.zeros_like(grid)
    rho[1:] = spec.rho_density(inner)
    alpha = _trapezoid_convolution(beta, rho, h)
    return GridDensity(grid, np.maximum(alpha, 0.0), tail_bound=beyond, meta=meta)


def pvf_reports(spec: PvfSpec, tolerance: float = 1e-5) -> List[FormulaReport]:
    """Laplace oracle on the β series (against L) and on α (against L·κ″)."""
    label = f"pvf({spec.r:g})"
    thetas = _pvf_probes(spec)
    atom = 1.0 if spec.case == 1 else 0.0

    def reach(theta: float) -> float:
        # the density series only converge on a bounded stretch
        _, mean, var = spec.cumulants(theta)
        return mean + 40.0 * math.sqrt(var)

    def beta_transform(theta: float) -> float:
        return laplace_oracle(spec.beta_density, theta, upper=reach(theta), rtol=1e-9, atom=atom)

    def laplace(theta: float) -> float:
        return math.exp(spec.cumulants(theta)[0])

    def alpha_target(theta: float) -> float:
        kappa, _, second = spec.cumulants(theta)
        return math.exp(kappa) * second

    reports = [validate_candidate(label, "beta-series", beta_transform, laplace, thetas, tolerance)]
    if spec.case == 1:
        def alpha_transform(theta: float) -> float:
            return laplace_oracle(spec.alpha_density, theta, upper=reach(theta), rtol=1e-9)

        reports.append(validate_candidate(label, "alpha-series", alpha_transform, alpha_target, thetas, tolerance))
    else:
        alpha = pvf_density(spec, "alpha")
        reports.append(validate_candidate(
            label, "alpha-grid", lambda theta: laplace_oracle(alpha, theta, rtol=1e-3),
            alpha_target, thetas, max(tolerance, 1e-3),
        ))
    return reports


def pvf_rf(spec: PvfSpec, tolerance: float = 1e-5):
    """φ = dα/dβ for V(u) = a·u^r; case 1 pointwise with φ(0) = 0, case 2 on the grid."""
    reports = pvf_reports(spec, tolerance)
    failed = [report for report in reports if not report.passed]
    if failed:
        raise FormulaInvalid(
            f"power variance series for r = {spec.r:g} failed the Laplace oracle",
            {"reports": [r.model_dump() for r in reports]},
        )
    label = f"pvf({spec.r:g})"
    provenance = {"route": "pvf", "case": spec.case, "reports": [r.model_dump() for r in reports]}
    if spec.case == 1:
        return DensityRatioRf(label, lambda x: np.exp(spec.log_phi(x)), at_zero=0.0, provenance=provenance)
    beta = pvf_density(spec, "beta")
    alpha = pvf_density(spec, "alpha")
    return GridRatioRf(label, alpha, beta, floor=1e-300, provenance=provenance)


# Ressel

RESSEL_PROBE = -1.0
RESSEL_X_MAX = 60.0
RESSEL_POINTS = 1 << 13


def ressel_weight(m: int) -> float:
    """Weight C(m, 2) of β^{*m} in ρ."""
    return m * (m - 1) / 2.0


@dataclass(frozen=True)
class ResselGrid:
    """β, its convolution powers, ρ and α on one grid."""

    beta: GridDensity
    powers: Dict[int, np.ndarray]
    rho: GridDensity
    alpha: GridDensity
    m_max: int


def ressel_tail_bound(theta: float, m_max: int) -> float:
    """Σ_{m>m_max} C(m, 2)·L(θ)^m relative to κ″(θ)."""
    family = ResselFamily()
    kappa, _, second = family.exact_cumulants(theta)
    t = math.exp(kappa)
    m = np.arange(m_max + 1, m_max + 4000)
    tail = float(np.sum(m * (m - 1) / 2.0 * t ** m))
    return tail / second


def ressel_grid(m_max: int = 60, x_max: float = RESSEL_X_MAX, points: int = RESSEL_POINTS) -> ResselGrid:
    """β^{*m} for m ≤ m_max + 1 by iterated grid convolution, then ρ and α = β∗ρ."""
    if m_max < 4:
        raise ValueError("Ressel truncation needs m_max ≥ 4")
    grid = np.linspace(0.0, x_max, points)
    h = grid[1] - grid[0]
    family = ResselFamily()
    beta = np.array([family.density(x) if x > 0 else 1.0 for x in grid])
    powers = {1: beta}
    current = beta
    for m in range(2, m_max + 1):
        current = np.maximum(_trapezoid_convolution(current, beta, h), 0.0)
        powers[m] = current
    rho = sum(ressel_weight(m) * powers[m] for m in range(2, m_max + 1))
    alpha = np.maximum(_trapezoid_convolution(beta, rho, h), 0.0)
    beyond = 2.0 / math.sqrt(2.0 * math.pi * x_max)
    meta = {"m_max": m_max, "x_max": x_max}
    logger.debug(f"Ressel grid built: {points} points, m_max = {m_max}")
    return ResselGrid(
        beta=GridDensity(grid, beta, tail_bound=beyond, meta=meta),
        powers=powers,
        rho=GridDensity(grid, rho, tail_bound=0.0, meta=meta),
        alpha=GridDensity(grid, alpha, tail_bound=0.0, meta=meta),
        m_max=m_max,
    )


def ressel_rf(m_max: int = 60, x_max: float = RESSEL_X_MAX, points: int = RESSEL_POINTS,
              probe: float = RESSEL_PROBE, tolerance: float = 1e-2) -> GridRatioRf:
    """φ = α/β on the grid; the truncation of ρ at m_max is checked at ``probe``."""
    bound = ressel_tail_bound(probe, m_max)
    if bound > tolerance:
        raise TailTooHeavy(
            f"ρ truncated at m = {m_max} leaves {bound:.2e} of κ″ at θ = {probe}",
            {"m_max": m_max, "theta": probe, "bound": bound},
        )
    built = ressel_grid(m_max, x_max, points)
    return GridRatioRf(
        "ressel", built.alpha, built.beta, at_zero=0.0, floor=1e-300,
        provenance={"route": "ressel-grid", "m_max": m_max, "x_max": x_max, "tail_bound": bound},
    )


def ressel_power_gap(built: ResselGrid, m: int, theta: float = RESSEL_PROBE) -> float:
    """Max tilted gap between the grid β^{*m} and m·y^{y+m−1}e^{−y}/Γ(y+m+1)."""
    grid = built.beta.grid
    exact = np.zeros_like(grid)
    exact[1:] = ressel_convolution_power(grid[1:], m)
    if m == 1:
        exact[0] = 1.0
    tilt = np.exp(theta * grid)
    return float(np.max(np.abs(built.powers[m] - exact) * tilt))
