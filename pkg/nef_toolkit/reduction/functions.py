"""Reduction functions φ with E[φ(ξ_θ)] = V[ξ_θ], and the grid density carrier."""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np
from scipy import integrate

from nef_toolkit.errors import RfUnavailable


class RfKind(str, Enum):
    CLOSED_FORM = "closed-form"
    ATOM_TABLE = "atom-table"
    DENSITY_RATIO = "density-ratio"
    DENSITY_RATIO_GRID = "density-ratio-grid"


class ReductionFunction(ABC):
    """Evaluable φ with provenance."""

    kind: RfKind

    def __init__(self, label: str, support: str, provenance: Optional[Dict[str, Any]] = None):
        self.label = label
        self.support = support
        self.provenance = provenance or {}

    @abstractmethod
    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """φ at every entry of ``x``."""

    def __call__(self, x):
        values = self.evaluate(np.atleast_1d(np.asarray(x, dtype=float)))
        return float(values[0]) if np.ndim(x) == 0 else values

    def __repr__(self) -> str:
        return f"{type(self).__name__}(label={self.label!r}, kind={self.kind.value})"


class ClosedFormRf(ReductionFunction):
    """φ given by a formula; polynomial φ keeps its coefficients for exact comparison."""

    kind = RfKind.CLOSED_FORM

    def __init__(
        self,
        label: str,
        fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        coefficients: Optional[Sequence[float]] = None,
        support: str = "ℝ",
        provenance: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(label, support, provenance)
        if fn is None and coefficients is None:
            raise ValueError("a closed form needs a function or polynomial coefficients")
        self.coefficients = tuple(coefficients) if coefficients is not None else None
        self._fn = fn

    def evaluate(self, x):
        if self._fn is not None:
            return np.asarray(self._fn(x), dtype=float) * np.ones_like(x)
        return np.polynomial.polynomial.polyval(x, self.coefficients) * np.ones_like(x)


class AtomTableRf(ReductionFunction):
    """φ(n) = α_n/β_n on 0..N; entries with β_n = 0 are absent (NaN)."""

    kind = RfKind.ATOM_TABLE

    def __init__(self, label: str, values: np.ndarray, provenance: Optional[Dict[str, Any]] = None):
        super().__init__(label, f"{{0, …, {len(values) - 1}}}", provenance)
        self.values = np.array(values, dtype=float)
        self.values.setflags(write=False)

    @property
    def order(self) -> int:
        return len(self.values) - 1

    def table(self) -> Dict[int, float]:
        return {n: float(v) for n, v in enumerate(self.values) if not math.isnan(v)}

    def evaluate(self, x):
        index = np.asarray(x)
        if np.any(index != np.round(index)) or np.any(index < 0):
            raise RfUnavailable(f"{self.label} is defined on ℕ only", {"x": index.tolist()})
        if np.any(index > self.order):
            raise RfUnavailable(
                f"{self.label} table stops at n = {self.order}",
                {"order": self.order, "requested": int(index.max())},
            )
        return self.values[index.astype(int)]


class DensityRatioRf(ReductionFunction):
    """φ = α-density / β-density evaluated pointwise; ``at_zero`` covers an atom of β at 0."""

    kind = RfKind.DENSITY_RATIO

    def __init__(
        self,
        label: str,
        fn: Callable[[np.ndarray], np.ndarray],
        support: str = "(0, ∞)",
        at_zero: Optional[float] = None,
        provenance: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(label, support, provenance)
        self._fn = fn
        self.at_zero = at_zero

    def evaluate(self, x):
        out = np.empty(x.shape, dtype=float)
        zero = x == 0
        if np.any(zero):
            if self.at_zero is None:
                raise RfUnavailable(f"{self.label} is undefined at 0")
            out[zero] = self.at_zero
        if np.any(~zero):
            out[~zero] = self._fn(x[~zero])
        return out


@dataclass(frozen=True)
class GridDensity:
    """Density samples on the uniform grid 0, h, …, x_max, plus an optional atom at 0."""

    grid: np.ndarray
    values: np.ndarray
    tail_bound: float = 0.0
    atom: float = 0.0
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def x_max(self) -> float:
        return float(self.grid[-1])

    def mass(self, theta: float = 0.0) -> float:
        """Trapezoid ∫ e^{θx} density + atom."""
        return float(integrate.trapezoid(self.values * np.exp(theta * self.grid), self.grid)) + self.atom

    def interpolate(self, x) -> np.ndarray:
        return np.interp(x, self.grid, self.values, right=np.nan)


class GridRatioRf(ReductionFunction):
    """φ = α/β on a common grid, linear interpolation in between."""

    kind = RfKind.DENSITY_RATIO_GRID

    def __init__(
        self,
        label: str,
        alpha: GridDensity,
        beta: GridDensity,
        at_zero: Optional[float] = None,
        floor: float = 0.0,
        provenance: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(label, f"(0, {beta.x_max:g}]", provenance)
        self.grid = beta.grid
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(beta.values > floor, alpha.values / beta.values, np.nan)
        self.values = ratio
        self.at_zero = at_zero
        self.alpha = alpha
        self.beta = beta

    def evaluate(self, x):
        if np.any(x > self.grid[-1]):
            raise RfUnavailable(
                f"{self.label} grid stops at x = {self.grid[-1]:g}",
                {"x_max": float(self.grid[-1])},
            )
        defined = ~np.isnan(self.values)
        out = np.interp(x, self.grid[defined], self.values[defined])
        if self.at_zero is not None:
            out = np.where(x == 0, self.at_zero, out)
        return out
