"""Certified Chebyshev approximants for cos(xt), sin(xt) and sign(x).

Coefficients live in the Chebyshev basis on [-1, 1]. Every series carries
the sup-norm error it was certified against on a dense grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import special as _sp

from . import _kernels

INV_E = math.exp(-1.0)
SIGN_EPS_MAX = math.sqrt(2.0 / (math.e * math.pi))
GRID_POINTS = 1001
SLACK = 1e-10

Interval = tuple[float, float]


# ---------------------------------------------------------------------------
# special functions


def lambert_w(x: float, tol: float = 1e-13, maxiter: int = 100) -> float:
    """Principal branch W0(x) by Halley iteration.

    Raises ValueError for x < -1/e.
    """
    x = float(x)
    if math.isnan(x):
        raise ValueError("lambert_w of NaN")
    branch = -INV_E
    if x < branch:
        # tolerate roundoff in callers that pass -1/e computed another way
        if x > branch - 1e-15:
            return -1.0
        raise ValueError(f"lambert_w: argument {x} below -1/e")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    if x > math.e:
        lx = math.log(x)
        w = lx - math.log(lx)
    elif x < -0.25:
        # expansion around the branch point
        p = math.sqrt(max(0.0, 2.0 * (math.e * x + 1.0)))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    else:
        w = math.log1p(x)
    for _ in range(maxiter):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        step = f / denom
        w -= step
        if abs(step) <= tol * (1.0 + abs(w)):
            break
    return w


def bessel_j(m: int, x: float) -> float:
    if int(m) != m or m < 0:
        raise ValueError("bessel_j order must be a non-negative integer")
    return float(_sp.jv(int(m), x))


def chebyshev_t(k: int, x: float) -> float:
    if int(k) != k or k < 0:
        raise ValueError("chebyshev_t degree must be a non-negative integer")
    t0, t1 = 1.0, float(x)
    if k == 0:
        return t0
    for _ in range(int(k) - 1):
        t0, t1 = t1, 2.0 * x * t1 - t0
    return t1


def eval_special(kind: str, arg: float, order: int | None = None) -> float:
    """Dispatch to one of the scalar special functions by name."""
    if kind == "bessel_j":
        return bessel_j(0 if order is None else order, arg)
    if kind == "chebyshev_t":
        if order is None:
            raise ValueError("chebyshev_t needs an order")
        return chebyshev_t(order, arg)
    if kind == "erf":
        return math.erf(arg)
    if kind == "lambert_w":
        return lambert_w(arg)
    raise ValueError(f"unknown special function {kind!r}")


# ---------------------------------------------------------------------------
# series type


@dataclass(frozen=True)
class ChebyshevSeries:
    parity: str
    coeffs: np.ndarray
    err_bound: float = 0.0
    region: tuple[Interval, ...] = ((-1.0, 1.0),)
    target: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coeffs must be a non-empty 1-d sequence")
        if self.parity not in ("even", "odd"):
            raise ValueError("parity must be 'even' or 'odd'")
        wrong = c[1::2] if self.parity == "even" else c[0::2]
        if np.any(wrong != 0.0):
            raise ValueError(f"{self.parity} series has nonzero coefficients of the wrong parity")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, x):
        return series_eval(self, x)

    def scaled(self, factor: float) -> "ChebyshevSeries":
        tgt = self.target
        new_target = None if tgt is None else (lambda x, _t=tgt, _f=factor: _f * _t(x))
        return ChebyshevSeries(self.parity, self.coeffs * factor, abs(factor) * self.err_bound,
                               self.region, new_target)


@dataclass(frozen=True)
class TruncationPlan:
    t: float
    eps_tri: float
    R: int

    def __post_init__(self):
        if self.R != truncation_index(self.t, self.eps_tri):
            raise ValueError("R does not match the tail-sum truncation index")


def series_eval(series: ChebyshevSeries | Sequence[float], x):
    """Clenshaw evaluation of sum c_k T_k(x); scalar in, scalar out."""
    coeffs = series.coeffs if isinstance(series, ChebyshevSeries) else np.asarray(series, float)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(np.abs(xa) > 1.0):
        raise ValueError("series_eval: |x| > 1")
    out = _kernels.clenshaw(np.ascontiguousarray(coeffs, dtype=float), np.ascontiguousarray(xa.ravel()))
    out = out.reshape(xa.shape)
    return float(out[0]) if np.ndim(x) == 0 else out


def chebyshev_interpolate(f: Callable[[np.ndarray], np.ndarray], degree: int) -> np.ndarray:
    """Coefficients of the degree-n interpolant at the n+1 Chebyshev nodes (discrete cosine projection)."""
    n = degree + 1
    theta = np.pi * (np.arange(n) + 0.5) / n
    fx = f(np.cos(theta))
    c = (2.0 / n) * (np.cos(np.outer(np.arange(n), theta)) @ fx)
    c[0] *= 0.5
    return c


def sampled_error(series: ChebyshevSeries, points: int = GRID_POINTS) -> float:
    """Max |series - target| over equispaced samples of the certified region."""
    if series.target is None:
        raise ValueError("series has no target to compare against")
    worst = 0.0
    for lo, hi in series.region:
        xs = np.linspace(lo, hi, points)
        worst = max(worst, float(np.max(np.abs(series(xs) - series.target(xs)))))
    return worst


def sup_norm(series: ChebyshevSeries, points: int | None = None) -> float:
    n = points if points is not None else max(20001, 40 * series.degree + 1)
    xs = np.linspace(-1.0, 1.0, n)
    return float(np.max(np.abs(series(xs))))


# ---------------------------------------------------------------------------
# Jacobi-Anger truncation


def _check_tri(t: float, eps: float) -> None:
    if not t > 0:
        raise ValueError("t must be positive")
    if not 0.0 < eps < INV_E:
        raise ValueError("eps must lie in (0, 1/e)")


@lru_cache(maxsize=4096)
def _tails(t: float) -> tuple[np.ndarray, np.ndarray]:
    """tail_even[R] = 2 sum_{k>R} |J_2k(t)|, tail_odd[R] = 2 sum_{k>R} |J_2k+1(t)|."""
    m_max = int(math.ceil(math.e * t / 2.0 + 2.0 * math.log1p(t) + 60))
    m_max += m_max % 2
    j = np.abs(_sp.jv(np.arange(m_max + 2), t))
    even = j[0::2]
    odd = j[1::2]
    n = min(even.size, odd.size)
    even, odd = even[:n], odd[:n]
    # reverse cumulative sums, excluding index R itself
    te = 2.0 * (np.cumsum(even[::-1])[::-1] - even)
    to = 2.0 * (np.cumsum(odd[::-1])[::-1] - odd)
    return te, to


def truncation_index(t: float, eps: float) -> int:
    """Smallest R whose summed Jacobi-Anger tails (cos and sin) are both <= eps."""
    _check_tri(t, eps)
    te, to = _tails(float(t))
    ok = np.nonzero((te <= eps) & (to <= eps))[0]
    if ok.size == 0:  # pragma: no cover - the table is sized generously
        raise RuntimeError("Bessel tail table too short")
    return int(ok[0])


def r_closed(t: float, eps: float) -> int:
    """Smallest integer q > t with (t/q)^q <= eps."""
    if not t > 0 or not 0 < eps < 1:
        raise ValueError("need t > 0 and 0 < eps < 1")
    q = int(math.floor(t)) + 1
    log_eps = math.log(eps)
    while q * math.log(t / q) > log_eps:
        q += 1
    return q


def truncation_index_closed(t: float, eps: float) -> int:
    """Closed-form R = floor(r(et/2, 5 eps/4) / 2) used for query tables."""
    _check_tri(t, eps)
    return r_closed(math.e * t / 2.0, 1.25 * eps) // 2


def build_trig_polys(t: float, eps_tri: float) -> tuple[ChebyshevSeries, ChebyshevSeries, float]:
    """kappa-rescaled truncated expansions of cos(xt) (degree 2R) and sin(xt) (degree 2R+1)."""
    R = truncation_index(t, eps_tri)
    kappa = 1.0 / (1.0 + eps_tri)
    j = _sp.jv(np.arange(2 * R + 2), t)
    sign = (-1.0) ** np.arange(R + 1)
    c_cos = np.zeros(2 * R + 1)
    c_cos[0::2] = 2.0 * sign * j[0::2]
    c_cos[0] = j[0]
    c_sin = np.zeros(2 * R + 2)
    c_sin[1::2] = 2.0 * sign * j[1::2]
    bound = kappa * eps_tri
    p_cos = ChebyshevSeries("even", kappa * c_cos, bound,
                            target=lambda x: kappa * np.cos(t * np.asarray(x)))
    p_sin = ChebyshevSeries("odd", kappa * c_sin, bound,
                            target=lambda x: kappa * np.sin(t * np.asarray(x)))
    return p_cos, p_sin, kappa


# ---------------------------------------------------------------------------
# sign function via erf(kx)


def _check_sign(delta: float, eps_sign: float) -> None:
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    if not 0.0 < eps_sign <= SIGN_EPS_MAX * (1 + 1e-15):
        raise ValueError(f"eps_sign must lie in (0, {SIGN_EPS_MAX:.6f}]")


def sign_degree(delta: float, eps_sign: float) -> tuple[float, int]:
    """erf sharpness k and odd degree D for the sign approximant."""
    _check_sign(delta, eps_sign)
    k = math.sqrt(2.0) / delta * math.sqrt(math.log(8.0 / (math.pi * eps_sign**2)))
    w = lambert_w(512.0 / (math.pi * eps_sign**2 * math.e**2))
    D = 2 * math.ceil(16.0 * k / (math.sqrt(math.pi) * eps_sign) * math.exp(-0.5 * w)) + 1
    return k, int(D)


def build_sign_poly(delta: float, eps_sign: float) -> ChebyshevSeries:
    """Odd interpolant of erf(kx), certified against sign(x) on |x| >= delta/2."""
    k, D = sign_degree(delta, eps_sign)
    c = chebyshev_interpolate(lambda x: _sp.erf(k * x), D)
    c[0::2] = 0.0
    region = ((-1.0, -delta / 2.0), (delta / 2.0, 1.0))
    series = ChebyshevSeries("odd", c, eps_sign, region, target=np.sign)
    sup = sup_norm(series)
    if sup > 1.0:
        series = ChebyshevSeries("odd", c / sup, eps_sign, region, target=np.sign)
    err = sampled_error(series)
    if err > eps_sign + SLACK:
        raise RuntimeError(f"sign approximant misses its bound: {err:.3e} > {eps_sign:.3e}")
    return series
