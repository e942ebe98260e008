"""Families whose basis lives on ℕ.

Each family exposes log-weights as doubles for the cumulant machinery and
exact weights in an mpmath context for the coefficient pipelines. The
Lagrange families (Abel, Takács, large arcsine) keep the generator's
unnormalised atoms, so β_0 = 1 and Θ is bounded by the generator's radius.
"""

import math
from fractions import Fraction
from functools import lru_cache
from typing import List

import numpy as np
from mpmath.ctx_mp import MPContext
from scipy.special import gammaln

from nef_toolkit.core.nef import AtomicNef, ThetaInterval


def arcsine_polynomial(t: float, n: int):
    """p_n(t): p_{2m}(t) = ∏_{k<m}(t² + 4k²), p_{2m+1}(t) = t·∏_{k<m}(t² + (2k+1)²).

    Integer ``t`` gives an exact Python integer.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    half, odd = divmod(n, 2)
    result = t if odd else 1
    for k in range(half):
        step = 2 * k + 1 if odd else 2 * k
        result = result * (t * t + step * step)
    return result


def _log_arcsine_polynomial(t: np.ndarray, n: np.ndarray) -> np.ndarray:
    out = np.empty(len(n), dtype=float)
    for index, (t_value, n_value) in enumerate(zip(t, n)):
        half, odd = divmod(int(n_value), 2)
        steps = 2 * np.arange(half) + (1 if odd else 0)
        total = float(np.sum(np.log(t_value * t_value + steps * steps)))
        out[index] = total + (math.log(t_value) if odd else 0.0)
    return out


@lru_cache(maxsize=32)
def _large_arcsine_table(size: int) -> np.ndarray:
    n = np.arange(size)
    return _log_arcsine_polynomial((n + 1).astype(float), n) - gammaln(n + 2)


class PoissonFamily(AtomicNef):
    """Poisson(1) basis, β_n = e^{−1}/n!, L(θ) = exp(e^θ − 1)."""

    def __init__(self):
        super().__init__(
            "poisson",
            ThetaInterval(),
            probe_range=(-2.0, 2.0),
            mean_domain=(0.0, math.inf),
            variance_poly=(0.0, 1.0),
        )

    def log_weights(self, n):
        return -1.0 - gammaln(np.asarray(n) + 1)

    def exact_weights(self, ctx: MPContext, order: int) -> List:
        base = ctx.exp(-1)
        return [base / math.factorial(k) for k in range(order + 1)]

    def exact_cumulants(self, theta):
        rate = math.exp(theta)
        return rate - 1.0, rate, rate

    def mean_inverse(self, mu):
        self.check_mean(mu)
        return math.log(mu)

    def mean_inverse_array(self, mu):
        return np.log(mu)

    def draw(self, rng, theta):
        return rng.poisson(np.exp(theta)).astype(float)


class BinomialFamily(AtomicNef):
    """Binomial(m, 1/2) basis."""

    def __init__(self, m: int = 2):
        if m < 1:
            raise ValueError("binomial needs m ≥ 1")
        self.m = m
        self.support_size = m
        super().__init__(
            f"binomial({m})",
            ThetaInterval(),
            probe_range=(-2.0, 2.0),
            mean_domain=(0.0, float(m)),
            variance_poly=(0.0, 1.0, -1.0 / m),
        )

    def log_weights(self, n):
        n = np.asarray(n)
        out = np.full(n.shape, -np.inf)
        inside = (n >= 0) & (n <= self.m)
        k = n[inside]
        out[inside] = gammaln(self.m + 1) - gammaln(k + 1) - gammaln(self.m - k + 1) - self.m * math.log(2)
        return out

    def exact_weights(self, ctx, order):
        return [
            ctx.mpf(math.comb(self.m, k)) / 2 ** self.m if k <= self.m else ctx.mpf(0)
            for k in range(order + 1)
        ]

    def exact_cumulants(self, theta):
        p = 1.0 / (1.0 + math.exp(-theta))
        return self.m * (math.log1p(math.exp(theta)) - math.log(2)), self.m * p, self.m * p * (1 - p)

    def mean_inverse(self, mu):
        self.check_mean(mu)
        return math.log(mu / (self.m - mu))

    def mean_inverse_array(self, mu):
        return np.log(mu / (self.m - mu))

    def draw(self, rng, theta):
        return rng.binomial(self.m, 1.0 / (1.0 + np.exp(-theta))).astype(float)


class NegativeBinomialFamily(AtomicNef):
    """Negative binomial basis β_n = C(m+n−1, n) 2^{−m−n}; Θ = (−∞, log 2)."""

    def __init__(self, m: float = 2):
        if m <= 0:
            raise ValueError("negbin needs m > 0")
        self.m = m
        super().__init__(
            f"negbin({m:g})",
            ThetaInterval(upper=math.log(2.0)),
            probe_range=(-3.0, 0.5),
            mean_domain=(0.0, math.inf),
            variance_poly=(0.0, 1.0, 1.0 / m),
        )

    def log_weights(self, n):
        n = np.asarray(n)
        return (
            gammaln(self.m + n) - gammaln(n + 1) - gammaln(self.m)
            - (self.m + n) * math.log(2)
        )

    def exact_weights(self, ctx, order):
        m = ctx.mpf(self.m)
        weights = []
        current = ctx.mpf(2) ** (-m)
        for k in range(order + 1):
            weights.append(current)
            current = current * (m + k) / (2 * (k + 1))
        return weights

    def exact_cumulants(self, theta):
        q = math.exp(theta) / 2.0
        mean = self.m * q / (1.0 - q)
        return -self.m * (math.log(2.0) + math.log1p(-q)), mean, mean + mean * mean / self.m

    def mean_inverse(self, mu):
        self.check_mean(mu)
        return math.log(2.0 * mu / (self.m + mu))

    def mean_inverse_array(self, mu):
        return np.log(2.0 * mu / (self.m + mu))

    def draw(self, rng, theta):
        return rng.negative_binomial(self.m, 1.0 - np.exp(theta) / 2.0).astype(float)


class StrictArcsineFamily(AtomicNef):
    """β_n = p_n(1)/n!, L(θ) = exp(arcsin e^θ), V(u) = u(1+u²)."""

    def __init__(self):
        super().__init__(
            "strict-arcsine",
            ThetaInterval(upper=0.0),
            probe_range=(-3.0, -0.2),
            mean_domain=(0.0, math.inf),
            variance_poly=(0.0, 1.0, 0.0, 1.0),
        )

    def log_weights(self, n):
        n = np.asarray(n)
        size = int(n.max()) + 1 if n.size else 1
        cumulative = np.zeros(size)
        # p_n(1) = p_{n-2}(1)·(1 + (n-2)²) for both parities
        for k in range(2, size):
            cumulative[k] = cumulative[k - 2] + math.log(1 + (k - 2) ** 2)
        return cumulative[n] - gammaln(n + 1)

    def exact_weights(self, ctx, order):
        return [ctx.mpf(arcsine_polynomial(1, k)) / math.factorial(k) for k in range(order + 1)]

    def exact_cumulants(self, theta):
        z = math.exp(theta)
        root = math.sqrt(1.0 - z * z)
        return math.asin(z), z / root, z / root ** 3

    def mean_inverse(self, mu):
        self.check_mean(mu)
        return math.log(mu / math.sqrt(1.0 + mu * mu))


class AbelFamily(AtomicNef):
    """Lagrange generator g = e^z: β_n = (1+n)^{n−1}/n!, V(u) = u(1+u)²."""

    def __init__(self):
        super().__init__(
            "abel",
            ThetaInterval(upper=-1.0),
            probe_range=(-3.0, -1.2),
            mean_domain=(0.0, math.inf),
            variance_poly=(0.0, 1.0, 2.0, 1.0),
        )

    def log_weights(self, n):
        n = np.asarray(n)
        return (n - 1) * np.log1p(n) - gammaln(n + 1)

    def exact_weights(self, ctx, order):
        weights = []
        for k in range(order + 1):
            value = Fraction(k + 1) ** (k - 1) / math.factorial(k)
            weights.append(ctx.mpf(value.numerator) / value.denominator)
        return weights


class TakacsFamily(AtomicNef):
    """Lagrange generator g = 1/(1−z): β_n = Catalan(n), V(u) = u(1+u)(1+2u)."""

    def __init__(self):
        super().__init__(
            "takacs",
            ThetaInterval(upper=-math.log(4.0)),
            probe_range=(-4.0, -1.6),
            mean_domain=(0.0, math.inf),
            variance_poly=(0.0, 1.0, 3.0, 2.0),
        )

    def log_weights(self, n):
        n = np.asarray(n)
        return gammaln(2 * n + 1) - gammaln(n + 1) - gammaln(n + 2)

    def exact_weights(self, ctx, order):
        return [ctx.mpf(math.comb(2 * k, k) // (k + 1)) for k in range(order + 1)]


class LargeArcsineFamily(AtomicNef):
    """Lagrange generator g = exp(arcsin z): β_n = p_n(n+1)/(n+1)!, V(u) = u(1+2u+2u²)."""

    def __init__(self):
        super().__init__(
            "large-arcsine",
            ThetaInterval(upper=-math.pi / 4 - 0.5 * math.log(2.0)),
            probe_range=(-3.0, -1.25),
            mean_domain=(0.0, math.inf),
            variance_poly=(0.0, 1.0, 2.0, 2.0),
        )

    def log_weights(self, n):
        n = np.asarray(n)
        size = int(n.max()) + 1 if n.size else 1
        return _large_arcsine_table(size)[n]

    def exact_weights(self, ctx, order):
        return [
            ctx.mpf(arcsine_polynomial(k + 1, k)) / math.factorial(k + 1)
            for k in range(order + 1)
        ]
