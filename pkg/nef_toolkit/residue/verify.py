"""Residue checks for the conjectured variance function v(u) = a0·u·|u − u1|^{2n}.

τ = −2πi·Res(1/v, u1) is computed twice: by extracting the coefficient of
(z − u1)^{n−1} from a local series, and by integrating the real-line
representation of Re τ with the imaginary part fixed at π/v′(0). The sign
of Re τ decides the necessity predicate: Re τ < 0 puts θ0 + τ inside
Θ + id/2, which rules v out as a variance function.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel
from scipy import integrate

from nef_toolkit.core.series import TruncatedSeries, cauchy_product, make_context, power
from nef_toolkit.errors import NonConvergent, ToleranceNotMet
from nef_toolkit.infrastructure.logging import get_logger
from nef_toolkit.settings import settings


logger = get_logger(__name__)

ZERO_THRESHOLD = 1e-10
IMAGINARY_TOLERANCE = 1e-8
AGREEMENT_TOLERANCE = 1e-6
CONTOUR_TOL = 1e-9

DEFAULT_GRID = tuple(
    complex(re, im) for re in (-2.0, -0.3, 0.0, 0.3, 2.0) for im in (0.5, 1.0, 3.0)
)


@dataclass(frozen=True)
class ConjectureVf:
    """v(u) = a0·u·(u − u1)ⁿ(u − ū1)ⁿ on u > 0."""

    a0: float
    u1: complex
    n: int

    def __post_init__(self):
        object.__setattr__(self, "u1", complex(self.u1))
        if not self.a0 > 0:
            raise ValueError(f"a0 must be positive, got {self.a0}")
        if not self.u1.imag > 0:
            raise ValueError(f"u1 must lie in the upper half plane, got {self.u1}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")

    @property
    def v_prime0(self) -> float:
        return self.a0 * abs(self.u1) ** (2 * self.n)

    @property
    def d(self) -> float:
        return 2.0 * math.pi / self.v_prime0

    def __call__(self, u):
        return self.a0 * u * np.abs(u - self.u1) ** (2 * self.n)


class TauMethod(str, Enum):
    SERIES = "series-residue"
    CONTOUR = "contour-quadrature"


class TauResult(BaseModel):
    """τ from one method with its error bound."""

    tau_re: float
    tau_im: float
    method: TauMethod
    tail_error: float = 0.0

    @property
    def tau(self) -> complex:
        return complex(self.tau_re, self.tau_im)

    class Config:
        json_schema_extra = {
            "example": {
                "tau_re": -1.5707963267948966,
                "tau_im": 1.5707963267948966,
                "method": "series-residue",
                "tail_error": 0.0,
            }
        }


def classify_sign(value: float, scale: float) -> int:
    """−1, 0 or 1; values below ZERO_THRESHOLD·scale count as zero."""
    if abs(value) < ZERO_THRESHOLD * scale:
        return 0
    return 1 if value > 0 else -1


def residue_dps(vf: ConjectureVf) -> int:
    """Digits for the local series; cancellation grows like (|u1|/Im u1)^{2n}."""
    spread = abs(vf.u1) / vf.u1.imag
    return settings.series_dps + int(math.ceil(vf.n * (1.0 + 2.0 * math.log10(spread))))


def residue_series(vf: ConjectureVf) -> TauResult:
    """τ from the coefficient of (z − u1)^{n−1} in 1/(a0·z·(z − ū1)ⁿ)."""
    ctx = make_context(residue_dps(vf))
    u1 = ctx.mpc(vf.u1.real, vf.u1.imag)
    order = vf.n - 1

    inverse_z = TruncatedSeries([(-1) ** k / u1 ** (k + 1) for k in range(order + 1)])
    gap = TruncatedSeries(([u1 - ctx.conj(u1), ctx.mpc(1)] + [ctx.mpc(0)] * order)[:order + 1])
    local = cauchy_product(inverse_z, power(gap, -vf.n))

    residue = local[order] / vf.a0
    tau = complex(-2 * ctx.pi * ctx.mpc(0, 1) * residue)
    return TauResult(tau_re=tau.real, tau_im=tau.imag, method=TauMethod.SERIES)


def contour_integrand(vf: ConjectureVf) -> Callable[[float], float]:
    """α(z) = (4 Re u1/a0) Σ_{j<n} A^{j−n} B^{−1−j}, A = |z + u1|², B = |z − u1|².

    Equal to (ϑ(−z) − ϑ(z))/(a0·z·ϑ(−z)ϑ(z)) without the cancellation at
    small z, and continuous at z = 0.
    """
    re = vf.u1.real
    modulus2 = abs(vf.u1) ** 2
    scale = 4.0 * re / vf.a0
    j = np.arange(vf.n, dtype=float)
    a_exponents = j - vf.n
    b_exponents = -1.0 - j

    def alpha(z: float) -> float:
        a = z * z + 2.0 * z * re + modulus2
        b = z * z - 2.0 * z * re + modulus2
        return scale * float(np.sum(np.power(a, a_exponents) * np.power(b, b_exponents)))

    return alpha


def contour_tail_bound(vf: ConjectureVf, radius: float) -> float:
    """Bound on ∫_R^∞ |α|, valid for R ≥ 2|u1|."""
    re = abs(vf.u1.real)
    if re == 0.0:
        return 0.0
    n = vf.n
    log_bound = (
        math.log(16.0 * n * re / (vf.a0 * (2 * n + 1)))
        + n * math.log(4.0)
        - (2 * n + 1) * math.log(radius)
    )
    return math.exp(log_bound)


def contour_tau(vf: ConjectureVf, tol: float = CONTOUR_TOL) -> TauResult:
    """τ with Im τ = π/v′(0) and Re τ = −∫_0^∞ α(z) dz.

    The cut-off R doubles from 2|u1| until the analytic tail bound is below
    a tenth of ``tol`` relative to Im τ, a lower bound for |τ|.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    tau_im = math.pi / vf.v_prime0
    radius = 2.0 * abs(vf.u1)
    for _ in range(200):
        if contour_tail_bound(vf, radius) <= 0.1 * tol * tau_im:
            break
        radius *= 2.0
    tail = contour_tail_bound(vf, radius)

    peak = abs(vf.u1.real)
    options = {"epsabs": 0.0, "epsrel": max(0.1 * tol, 1e-13), "limit": 500}
    if 0.0 < peak < radius:
        options["points"] = [peak]
    value, abserr = integrate.quad(contour_integrand(vf), 0.0, radius, **options)

    tau_re = -value
    error = abserr + tail
    magnitude = math.hypot(tau_re, tau_im)
    if not math.isfinite(value) or error > tol * magnitude:
        raise ToleranceNotMet(
            f"contour quadrature error {error:.2e} exceeds {tol:.1e}·|τ|",
            {"n": vf.n, "u1": str(vf.u1), "abserr": abserr, "tail": tail, "radius": radius},
        )
    return TauResult(tau_re=tau_re, tau_im=tau_im, method=TauMethod.CONTOUR, tail_error=error)


def integrand_positive(vf: ConjectureVf, radius: Optional[float] = None, points: int = 400) -> bool:
    """α(z) > 0 on a mesh of (0, R]; expected whenever Re u1 > 0."""
    radius = radius or 4.0 * abs(vf.u1)
    alpha = contour_integrand(vf)
    return all(alpha(z) > 0 for z in np.linspace(radius / points, radius, points))


def theta0(vf: ConjectureVf, mu0: float) -> float:
    """θ0 = ∫_{μ0}^∞ dt/v(t), the right end of Θ."""
    if not mu0 > 0:
        raise ValueError(f"μ0 must be positive, got {mu0}")
    split = max(mu0, 2.0 * abs(vf.u1))
    options = {"epsabs": 0.0, "epsrel": 1e-12, "limit": 200}

    def reciprocal(t: float) -> float:
        return 1.0 / float(vf(t))

    head = integrate.quad(reciprocal, mu0, split, **options) if split > mu0 else (0.0, 0.0)
    tail = integrate.quad(reciprocal, split, math.inf, **options)
    value = head[0] + tail[0]
    error = head[1] + tail[1]
    if not (math.isfinite(value) and value > 0) or error > 1e-8 * value:
        raise NonConvergent(
            "θ0 quadrature missed its tolerance",
            {"mu0": mu0, "value": value, "abserr": error},
        )
    return value


class NecessityReport(BaseModel):
    """Membership of θ1 = θ0 + τ in S0⁺ and in Θ + id/2, Θ = (−∞, θ0)."""

    a0: float
    u1_re: float
    u1_im: float
    n: int
    mu0: float
    theta0: float
    tau_re: float
    tau_im: float
    d: float
    theta1_re: float
    theta1_im: float
    in_s0_plus: bool
    in_shifted_theta: bool
    vf_impossible: bool
    verdict: str

    class Config:
        json_schema_extra = {
            "example": {
                "a0": 1.0, "u1_re": 1.0, "u1_im": 1.0, "n": 1, "mu0": 1.0,
                "theta0": 0.7854, "tau_re": -1.5708, "tau_im": 1.5708, "d": 3.1416,
                "theta1_re": -0.7854, "theta1_im": 1.5708,
                "in_s0_plus": False, "in_shifted_theta": True,
                "vf_impossible": True, "verdict": "vf-impossible",
            }
        }


def necessity_predicate(vf: ConjectureVf, mu0: float = 1.0) -> NecessityReport:
    """Evaluate the necessity argument at θ1 = θ0 + τ.

    The verdict depends on μ0 only through θ0, which shifts θ1 and Θ alike.
    """
    start = theta0(vf, mu0)
    tau = residue_series(vf).tau
    sign = classify_sign(tau.real, abs(tau))
    inside = sign < 0
    half_period = vf.d / 2.0
    on_line = abs(tau.imag - half_period) <= IMAGINARY_TOLERANCE * half_period
    strip = 0.0 < tau.imag < half_period * (1.0 - IMAGINARY_TOLERANCE)
    in_shifted = inside and on_line
    in_s0 = inside and strip
    impossible = in_shifted or in_s0
    return NecessityReport(
        a0=vf.a0, u1_re=vf.u1.real, u1_im=vf.u1.imag, n=vf.n, mu0=mu0,
        theta0=start, tau_re=tau.real, tau_im=tau.imag, d=vf.d,
        theta1_re=start + tau.real, theta1_im=tau.imag,
        in_s0_plus=in_s0, in_shifted_theta=in_shifted, vf_impossible=impossible,
        verdict="vf-impossible" if impossible else "no-contradiction",
    )


class ScanCell(BaseModel):
    """One (n, u1) cell of the conjecture scan."""

    n: int
    u1_re: float
    u1_im: float
    tau_re: float
    tau_im: float
    d: float
    method_gap: float
    verdict: str
    violations: List[str] = []

    def row(self) -> Dict[str, object]:
        return {
            "n": self.n,
            "re_u1": self.u1_re,
            "im_u1": self.u1_im,
            "re_tau": self.tau_re,
            "im_tau": self.tau_im,
            "d": self.d,
            "method_gap": self.method_gap,
            "verdict": self.verdict,
        }


class ConjectureScan(BaseModel):
    """Scan table in grid order."""

    n_max: int
    a0: float
    cells: List[ScanCell]

    @property
    def violations(self) -> List[ScanCell]:
        return [cell for cell in self.cells if cell.violations]

    @property
    def passed(self) -> bool:
        return not self.violations

    def rows(self) -> List[Dict[str, object]]:
        return [cell.row() for cell in self.cells]


def scan_cell(n: int, u1: complex, a0: float = 1.0, tol: float = CONTOUR_TOL) -> ScanCell:
    """Sign law, exact imaginary part and method agreement for one cell."""
    vf = ConjectureVf(a0, u1, n)
    tau = residue_series(vf).tau
    magnitude = abs(tau)
    violations = []

    sign = classify_sign(tau.real, magnitude)
    if sign != -int(np.sign(vf.u1.real)):
        violations.append(f"sign law: Re τ = {tau.real:.6g} for Re u1 = {vf.u1.real:g}")
    if abs(tau.imag - vf.d / 2.0) > IMAGINARY_TOLERANCE * vf.d / 2.0:
        violations.append(f"Im τ = {tau.imag:.17g} differs from d/2 = {vf.d / 2.0:.17g}")

    try:
        contour = contour_tau(vf, tol)
        gap = abs(tau - contour.tau) / magnitude
        if gap > AGREEMENT_TOLERANCE:
            violations.append(f"series and contour differ by {gap:.2e}·|τ|")
    except ToleranceNotMet as e:
        gap = math.nan
        violations.append(str(e))

    return ScanCell(
        n=n, u1_re=vf.u1.real, u1_im=vf.u1.imag, tau_re=tau.real, tau_im=tau.imag,
        d=vf.d, method_gap=gap, verdict="vf-impossible" if sign < 0 else "no-contradiction",
        violations=violations,
    )


def conjecture_scan(
    n_max: int,
    u1_grid: Optional[Sequence[complex]] = None,
    a0: float = 1.0,
    tol: float = CONTOUR_TOL,
) -> ConjectureScan:
    """Every n ≤ n_max against every grid point; violated cells are reported, not raised."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    grid = [complex(u) for u in (u1_grid if u1_grid is not None else DEFAULT_GRID)]
    bad = [u for u in grid if not u.imag > 0]
    if bad:
        raise ValueError(f"grid points must have Im(u1) > 0: {bad}")

    logger.debug(f"Scanning n ≤ {n_max} over {len(grid)} grid points on {settings.threads} threads")
    cells = Parallel(n_jobs=settings.threads, prefer="threads")(
        delayed(scan_cell)(n, u1, a0, tol) for n in range(1, n_max + 1) for u1 in grid
    )
    scan = ConjectureScan(n_max=n_max, a0=a0, cells=list(cells))
    if scan.passed:
        logger.info(f"Conjecture scan: {len(scan.cells)} cells, no violations")
    else:
        logger.warning(f"Conjecture scan: {len(scan.violations)} of {len(scan.cells)} cells violated")
    return scan
