"""Normal and gamma distribution functions and their inverses.

Only the scalar routines the chance-constrained models need. The normal cdf
goes through ``math.erfc``; the incomplete gamma ratio is evaluated by its
power series below ``x < a + 1`` and by a Lentz continued fraction above.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)
_EPS = 1e-16
_TINY = 1e-300


def std_normal_cdf(z: float) -> float:
    z = float(z)
    if not math.isfinite(z):
        raise ValueError(f"std_normal_cdf needs a finite argument, got {z}")
    return 0.5 * math.erfc(-z / _SQRT2)


def std_normal_pdf(z: float) -> float:
    return math.exp(-0.5 * z * z) / _SQRT2PI


# Acklam's rational approximation, ~1e-9 relative; refined by Newton below.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _acklam(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
                / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    if p > 1.0 - _P_LOW:
        return -_acklam(1.0 - p)
    q = p - 0.5
    r = q * q
    return ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
            / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))


def std_normal_quantile(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if alpha == 0.5:
        return 0.0
    z = _acklam(alpha)
    for _ in range(4):
        # work on the tail nearer to z to keep the residual small
        if z < 0:
            resid = std_normal_cdf(z) - alpha
        else:
            resid = (1.0 - alpha) - 0.5 * math.erfc(z / _SQRT2)
        step = resid / std_normal_pdf(z)
        z -= step
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            break
    return z


@dataclass(frozen=True)
class GammaParams:
    shape: float
    scale: float = 1.0

    def __post_init__(self):
        if not (self.shape > 0 and math.isfinite(self.shape)):
            raise ValueError(f"gamma shape must be positive, got {self.shape}")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError(f"gamma scale must be positive, got {self.scale}")


def _lower_series(a: float, x: float) -> float:
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(10000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_contfrac(a: float, x: float) -> float:
    # modified Lentz on the even form of the continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def regularized_lower_gamma(a: float, x: float) -> float:
    """P(a, x) = gamma(a, x) / Gamma(a)."""
    if x <= 0.0:
        return 0.0
    if x < a + 1.0:
        return min(1.0, _lower_series(a, x))
    return max(0.0, 1.0 - _upper_contfrac(a, x))


def regularized_upper_gamma(a: float, x: float) -> float:
    if x <= 0.0:
        return 1.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _lower_series(a, x))
    return min(1.0, _upper_contfrac(a, x))


def gamma_cdf(p: GammaParams, x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"gamma_cdf needs a finite argument, got {x}")
    return regularized_lower_gamma(p.shape, x / p.scale)


def gamma_pdf(p: GammaParams, x: float) -> float:
    if x <= 0.0:
        return 0.0
    k, th = p.shape, p.scale
    return math.exp((k - 1.0) * math.log(x / th) - x / th - math.lgamma(k)) / th


def gamma_quantile(p: GammaParams, alpha: float) -> float:
    """Inverse gamma cdf by safeguarded Newton inside a shrinking bracket."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    k = p.shape
    # work on unit scale, rescale at the end
    unit = GammaParams(k)
    lo, hi = 0.0, max(1.0, k)
    while gamma_cdf(unit, hi) < alpha:
        lo, hi = hi, 2.0 * hi
    # Wilson-Hilferty starting point, clipped into the bracket
    z = std_normal_quantile(alpha)
    q = k * (1.0 - 1.0 / (9.0 * k) + z / (3.0 * math.sqrt(k))) ** 3
    if not lo < q < hi:
        q = 0.5 * (lo + hi)
    for _ in range(200):
        f = gamma_cdf(unit, q) - alpha
        if f == 0.0:
            break
        if f < 0:
            lo = q
        else:
            hi = q
        dens = gamma_pdf(unit, q)
        nxt = q - f / dens if dens > 0 else 0.5 * (lo + hi)
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - q) <= 1e-15 * q:
            q = nxt
            break
        q = nxt
    return q * p.scale
