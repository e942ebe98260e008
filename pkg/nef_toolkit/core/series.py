"""Truncated formal power series.

A ``TruncatedSeries`` holds the coefficients of z^0..z^N. Coefficients may be
doubles, complex doubles or mpmath numbers; the last kind backs the
extended-precision coefficient pipelines. Every operation is exact on the
retained coefficients and returns a new immutable series whose order is the
minimum of the operand orders.
"""

import cmath
import math
from fractions import Fraction
from typing import Any, Iterable, Iterator, Optional, Union

import numpy as np
from mpmath.ctx_mp import MPContext

from nef_toolkit.errors import (
    NonpositiveConstantTerm,
    NonzeroInnerConstant,
    SeriesRangeError,
    ZeroConstantTerm,
)


Scalar = Any
SeriesLike = Union['TruncatedSeries', Iterable[Scalar]]


def make_context(dps: int) -> MPContext:
    """Private mpmath context with ``dps`` working digits.

    A dedicated context keeps precision local to one pipeline, so pipelines
    running on different threads never share mpmath's global state.
    """
    ctx = MPContext()
    ctx.dps = dps
    return ctx


def _context_of(value: Scalar) -> Optional[MPContext]:
    return getattr(value, "context", None)


def to_scalar(value: Scalar, ctx: Optional[MPContext] = None) -> Scalar:
    """Convert ``value`` to a double, or to an mpmath number of ``ctx``."""
    if ctx is None:
        if isinstance(value, Fraction):
            return float(value)
        if _context_of(value) is not None:
            return complex(value) if hasattr(value, "imag") and value.imag else float(value)
        return value
    if isinstance(value, Fraction):
        return ctx.mpf(value.numerator) / value.denominator
    if isinstance(value, complex):
        return ctx.mpc(value)
    if _context_of(value) is not None and hasattr(value, "imag") and value.imag:
        return ctx.mpc(value)
    return ctx.mpf(value)


def _log(x: Scalar) -> Scalar:
    ctx = _context_of(x)
    if ctx is not None:
        return ctx.log(x)
    if isinstance(x, complex):
        return cmath.log(x)
    return math.log(x)


def _exp(x: Scalar) -> Scalar:
    ctx = _context_of(x)
    if ctx is not None:
        return ctx.exp(x)
    if isinstance(x, complex):
        return cmath.exp(x)
    return math.exp(x)


def _as_array(values: Any) -> np.ndarray:
    if isinstance(values, np.ndarray):
        if values.dtype == object or np.iscomplexobj(values):
            return values.copy()
        return values.astype(np.float64)
    items = [float(v) if isinstance(v, Fraction) else v for v in values]
    if any(_context_of(v) is not None for v in items):
        array = np.empty(len(items), dtype=object)
        array[:] = items
        return array
    if any(isinstance(v, complex) for v in items):
        return np.asarray(items, dtype=np.complex128)
    return np.asarray(items, dtype=np.float64)


def _ensure_finite(array: np.ndarray, operation: str) -> None:
    if array.dtype == object:
        return
    if not np.all(np.isfinite(array)):
        raise SeriesRangeError(
            f"{operation} produced coefficients outside the double range",
            {"operation": operation},
        )


class TruncatedSeries:
    """Immutable power series truncated at order N."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: SeriesLike):
        if isinstance(coeffs, TruncatedSeries):
            array = coeffs._coeffs.copy()
        else:
            array = _as_array(coeffs)
        if array.ndim != 1 or len(array) == 0:
            raise ValueError("a series needs at least one coefficient")
        array.setflags(write=False)
        self._coeffs = array

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def order(self) -> int:
        return len(self._coeffs) - 1

    @property
    def is_multiprecision(self) -> bool:
        return self._coeffs.dtype == object

    def __len__(self) -> int:
        return len(self._coeffs)

    def __getitem__(self, index):
        return self._coeffs[index]

    def __iter__(self) -> Iterator[Scalar]:
        return iter(self._coeffs)

    def __repr__(self) -> str:
        head = ", ".join(str(c) for c in self._coeffs[:6])
        tail = ", ..." if self.order > 5 else ""
        return f"TruncatedSeries([{head}{tail}], order={self.order})"

    def to_float(self) -> np.ndarray:
        """Coefficients as a double (or complex double) array."""
        if not self.is_multiprecision:
            return np.array(self._coeffs)
        if any(getattr(c, "imag", 0) for c in self._coeffs):
            return np.array([complex(c) for c in self._coeffs], dtype=np.complex128)
        return np.array([float(c) for c in self._coeffs], dtype=np.float64)

    def truncate(self, order: int) -> 'TruncatedSeries':
        if order > self.order:
            raise ValueError(f"cannot extend order {self.order} to {order}")
        return TruncatedSeries(self._coeffs[:order + 1])

    def _zero(self) -> Scalar:
        return self._coeffs[0] * 0

    # arithmetic

    def __add__(self, other: Any) -> 'TruncatedSeries':
        if isinstance(other, TruncatedSeries):
            order = min(self.order, other.order)
            return TruncatedSeries(self._coeffs[:order + 1] + other._coeffs[:order + 1])
        values = self._coeffs.copy()
        values[0] = values[0] + other
        return TruncatedSeries(values)

    __radd__ = __add__

    def __neg__(self) -> 'TruncatedSeries':
        return TruncatedSeries(-self._coeffs)

    def __sub__(self, other: Any) -> 'TruncatedSeries':
        return self + (-other)

    def __rsub__(self, other: Any) -> 'TruncatedSeries':
        return (-self) + other

    def __mul__(self, other: Any) -> 'TruncatedSeries':
        if isinstance(other, TruncatedSeries):
            return cauchy_product(self, other)
        return TruncatedSeries(self._coeffs * other)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> 'TruncatedSeries':
        if isinstance(other, TruncatedSeries):
            return cauchy_product(self, reciprocal(other))
        return TruncatedSeries(self._coeffs / other)

    def __pow__(self, exponent: Union[int, float]) -> 'TruncatedSeries':
        return power(self, exponent)


def _cauchy(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    if a.dtype == object or b.dtype == object:
        out = np.empty(order + 1, dtype=object)
        for k in range(order + 1):
            out[k] = np.dot(a[:k + 1], b[k::-1])
        return out
    return np.convolve(a[:order + 1], b[:order + 1])[:order + 1]


def cauchy_product(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """result[k] = Σ_{j≤k} a[j]·b[k−j] up to the smaller order."""
    order = min(a.order, b.order)
    out = _cauchy(a.coeffs, b.coeffs, order)
    _ensure_finite(out, "cauchy_product")
    return TruncatedSeries(out)


def compose(outer: TruncatedSeries, inner: TruncatedSeries) -> TruncatedSeries:
    """Coefficients of outer(inner(z)); inner must vanish at the origin."""
    if inner[0] != 0:
        raise NonzeroInnerConstant(
            "composition needs inner[0] = 0", {"inner0": str(inner[0])}
        )
    order = min(outer.order, inner.order)
    inner_c = inner.coeffs[:order + 1]
    result = np.zeros(order + 1, dtype=np.result_type(outer.coeffs, inner_c))
    result[0] = outer[order]
    # Horner in the series ring
    for k in range(order - 1, -1, -1):
        result = _cauchy(result, inner_c, order)
        result[0] = result[0] + outer[k]
    _ensure_finite(result, "compose")
    return TruncatedSeries(result)


def log_series(a: TruncatedSeries) -> TruncatedSeries:
    """b with exp(b) = a; needs a real positive constant term."""
    a0 = a[0]
    if getattr(a0, "imag", 0) or not a0 > 0:
        raise NonpositiveConstantTerm(
            "log_series needs a[0] > 0", {"a0": str(a0)}
        )
    n = a.order
    coeffs = a.coeffs
    b = np.empty(n + 1, dtype=coeffs.dtype)
    weighted = np.empty(n + 1, dtype=coeffs.dtype)  # j·b_j
    b[0] = _log(a0)
    weighted[0] = b[0] * 0
    for k in range(1, n + 1):
        acc = k * coeffs[k]
        if k > 1:
            acc = acc - np.dot(weighted[1:k], coeffs[k - 1:0:-1])
        b[k] = acc / (k * a0)
        weighted[k] = k * b[k]
    _ensure_finite(b, "log_series")
    return TruncatedSeries(b)


def exp_series(a: TruncatedSeries) -> TruncatedSeries:
    """exp of a series, any constant term."""
    n = a.order
    coeffs = a.coeffs
    weighted = coeffs * np.arange(n + 1)
    b = np.empty(n + 1, dtype=coeffs.dtype)
    try:
        b[0] = _exp(coeffs[0])
    except OverflowError:
        raise SeriesRangeError("exp_series constant term overflows", {"a0": str(coeffs[0])})
    for k in range(1, n + 1):
        b[k] = np.dot(weighted[1:k + 1], b[k - 1::-1]) / k
    _ensure_finite(b, "exp_series")
    return TruncatedSeries(b)


def power(a: TruncatedSeries, exponent: Union[int, float]) -> TruncatedSeries:
    """a**exponent.

    Non-negative integer exponents use repeated squaring and accept a zero
    constant term; any other exponent uses the Miller recurrence and needs
    a[0] ≠ 0.
    """
    if isinstance(exponent, (int, np.integer)) and exponent >= 0:
        result = TruncatedSeries(np.concatenate(([a[0] * 0 + 1], a.coeffs[1:] * 0)))
        base = a
        remaining = int(exponent)
        while remaining:
            if remaining & 1:
                result = cauchy_product(result, base)
            remaining >>= 1
            if remaining:
                base = cauchy_product(base, base)
        return result

    a0 = a[0]
    if a0 == 0:
        raise ZeroConstantTerm(
            "negative or fractional power needs a[0] ≠ 0", {"exponent": exponent}
        )
    n = a.order
    coeffs = a.coeffs
    b = np.empty(n + 1, dtype=np.result_type(coeffs, np.asarray(a0 ** exponent)))
    b[0] = a0 ** exponent
    for k in range(1, n + 1):
        j = np.arange(1, k + 1)
        weights = (exponent + 1) * j - k
        b[k] = np.dot(coeffs[1:k + 1] * weights, b[k - 1::-1]) / (k * a0)
    _ensure_finite(b, "power")
    return TruncatedSeries(b)


def reciprocal(a: TruncatedSeries) -> TruncatedSeries:
    return power(a, -1)


def derivative(a: TruncatedSeries) -> TruncatedSeries:
    """d/dz, exact to order N−1."""
    if a.order == 0:
        return TruncatedSeries([a[0] * 0])
    return TruncatedSeries(a.coeffs[1:] * np.arange(1, a.order + 1))


def shift(a: TruncatedSeries, places: int = 1) -> TruncatedSeries:
    """Multiply by z**places keeping the order."""
    if places < 0:
        raise ValueError("places must be non-negative")
    zero = a[0] * 0
    head = np.empty(min(places, a.order + 1), dtype=a.coeffs.dtype)
    head[:] = zero
    return TruncatedSeries(np.concatenate((head, a.coeffs[:max(a.order + 1 - places, 0)])))


def lagrange_invert(g: TruncatedSeries, order: int) -> TruncatedSeries:
    """Solve h = w·g(h) to order N.

    Returns h = Σ_{n≥0} β_n w^{n+1} with β_n = [z^n] g(z)^{n+1}/(n+1),
    computed from successive powers of g.
    """
    if g[0] == 0:
        raise ZeroConstantTerm("lagrange_invert needs g[0] ≠ 0")
    if order < 1:
        raise ValueError("order must be at least 1")
    if g.order < order - 1:
        raise ValueError(f"g of order {g.order} cannot determine h to order {order}")
    base = g.coeffs[:order]
    h = np.empty(order + 1, dtype=base.dtype)
    h[0] = base[0] * 0
    current = base.copy()  # g^{n+1}
    for n in range(order):
        h[n + 1] = current[n] / (n + 1)
        if n + 1 < order:
            current = _cauchy(current, base, order - 1)
    _ensure_finite(h, "lagrange_invert")
    return TruncatedSeries(h)


# constructors

def from_fractions(values: Iterable[Fraction], ctx: Optional[MPContext] = None) -> TruncatedSeries:
    return TruncatedSeries([to_scalar(Fraction(v), ctx) for v in values])


def constant(value: Scalar, order: int, ctx: Optional[MPContext] = None) -> TruncatedSeries:
    return from_fractions([Fraction(value)] + [Fraction(0)] * order, ctx)


def exponential(order: int, ctx: Optional[MPContext] = None) -> TruncatedSeries:
    """e^z."""
    return from_fractions((Fraction(1, math.factorial(k)) for k in range(order + 1)), ctx)


def geometric(order: int, ctx: Optional[MPContext] = None) -> TruncatedSeries:
    """1/(1−z)."""
    return from_fractions([Fraction(1)] * (order + 1), ctx)


def log1p(order: int, ctx: Optional[MPContext] = None) -> TruncatedSeries:
    """log(1+z)."""
    values = [Fraction(0)] + [Fraction((-1) ** (k + 1), k) for k in range(1, order + 1)]
    return from_fractions(values, ctx)


def arcsin(order: int, ctx: Optional[MPContext] = None) -> TruncatedSeries:
    """arcsin z = Σ (2k)!/(4^k (k!)² (2k+1)) z^{2k+1}."""
    values = [Fraction(0)] * (order + 1)
    for k in range((order - 1) // 2 + 1):
        index = 2 * k + 1
        if index > order:
            break
        values[index] = Fraction(
            math.factorial(2 * k), 4 ** k * math.factorial(k) ** 2 * (2 * k + 1)
        )
    return from_fractions(values, ctx)
