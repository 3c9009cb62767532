"""QSP phase factors: evaluation, convention conversion and phase finding.

Two conventions are supported. In ``Wx`` the signal operator is
W(x) = exp(i arccos(x) X); in ``Reflection`` it is R(x) = [[x, s], [s, -x]]
with s = sqrt(1 - x^2). Both products read

    e^{i phi_0 Z} O(x) e^{i phi_1 Z} ... O(x) e^{i phi_d Z}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from . import _kernels
from .polyapprox import ChebyshevSeries, series_eval, sup_norm

WX = "Wx"
REFLECTION = "Reflection"
DEFAULT_TOL = 1e-8


class PhaseFindingError(RuntimeError):
    """Optimisation did not reach the requested residual."""

    def __init__(self, message: str, best_residual: float, best_phases: np.ndarray | None = None):
        super().__init__(message)
        self.best_residual = best_residual
        self.best_phases = best_phases


@dataclass(frozen=True)
class PhaseSequence:
    convention: str
    phases: np.ndarray
    residual: float = 0.0

    def __post_init__(self):
        if self.convention not in (WX, REFLECTION):
            raise ValueError(f"unknown convention {self.convention!r}")
        p = np.array(self.phases, dtype=float).ravel()
        if p.size == 0:
            raise ValueError("a phase sequence needs at least one phase")
        p.setflags(write=False)
        object.__setattr__(self, "phases", p)

    @property
    def degree(self) -> int:
        return self.phases.size - 1

    def __neg__(self) -> "PhaseSequence":
        return PhaseSequence(self.convention, -self.phases, self.residual)


def _signal(convention: str, x: float) -> np.ndarray:
    s = math.sqrt(max(0.0, 1.0 - x * x))
    if convention == WX:
        return np.array([[x, 1j * s], [1j * s, x]])
    return np.array([[x, s], [s, -x]], dtype=complex)


def qsp_matrix(seq: PhaseSequence, x: float) -> np.ndarray:
    """Full 2x2 product for a scalar signal x."""
    if abs(x) > 1.0:
        raise ValueError("eval_qsp: |x| > 1")
    sig = _signal(seq.convention, float(x))
    ph = seq.phases
    M = np.diag([np.exp(1j * ph[0]), np.exp(-1j * ph[0])])
    for p in ph[1:]:
        M = M @ sig @ np.diag([np.exp(1j * p), np.exp(-1j * p)])
    return M


def eval_qsp(seq: PhaseSequence, x: float) -> complex:
    """<0| product |0> by explicit 2x2 multiplication."""
    return complex(qsp_matrix(seq, x)[0, 0])


def eval_qsp_many(seq: PhaseSequence, xs) -> np.ndarray:
    """Vectorised <0| product |0> over an array of signals."""
    xs = np.asarray(xs, dtype=float)
    if np.any(np.abs(xs) > 1.0):
        raise ValueError("eval_qsp: |x| > 1")
    s = np.sqrt(np.clip(1.0 - xs * xs, 0.0, None))
    # track the first row (a, b) of the running product
    a = np.full(xs.shape, np.exp(1j * seq.phases[0]))
    b = np.zeros(xs.shape, dtype=complex)
    off = 1j * s if seq.convention == WX else s
    lower = xs if seq.convention == WX else -xs
    for p in seq.phases[1:]:
        a, b = a * xs + b * off, a * off + b * lower
        a = a * np.exp(1j * p)
        b = b * np.exp(-1j * p)
    return a


def wx_to_reflection(seq: PhaseSequence) -> PhaseSequence:
    """Shift Wx phases so the Reflection product has the same <0|.|0> entry."""
    if seq.convention != WX:
        raise ValueError("wx_to_reflection expects a Wx sequence")
    d = seq.degree
    if d < 1:
        raise ValueError("conversion needs degree >= 1")
    p = seq.phases.copy()
    p[0] += (2 * d - 1) * math.pi / 4.0
    p[1:d] -= math.pi / 2.0
    p[d] -= math.pi / 4.0
    return PhaseSequence(REFLECTION, p, seq.residual)


# ---------------------------------------------------------------------------
# phase finding


def _full_from_reduced(red: np.ndarray, d: int) -> np.ndarray:
    if d % 2 == 1:
        return np.concatenate([red, red[::-1]])
    return np.concatenate([red, red[-2::-1]])


def _reduced_jacobian(grad: np.ndarray, d: int, n_red: int) -> np.ndarray:
    J = np.zeros((grad.shape[0], n_red))
    for j in range(d + 1):
        J[:, min(j, d - j)] += grad[:, j]
    return J


def _newton(red, d, x, f, tol, maxiter):
    n_red = red.size
    best = (np.inf, red.copy())
    for _ in range(maxiter):
        val, grad = _kernels.wx_value_grad(_full_from_reduced(red, d), x)
        res = val.real - f
        err = float(np.max(np.abs(res)))
        if err < best[0]:
            best = (err, red.copy())
        if err < tol:
            break
        J = _reduced_jacobian(grad, d, n_red)
        try:
            step = np.linalg.solve(J, res)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, res, rcond=None)[0]
        if not np.all(np.isfinite(step)):
            break
        red = red - step
    return best


def _least_squares(red, d, x, f):
    n_red = red.size

    def fun(r):
        return _kernels.wx_value_grad(_full_from_reduced(r, d), x)[0].real - f

    def jac(r):
        grad = _kernels.wx_value_grad(_full_from_reduced(r, d), x)[1]
        return _reduced_jacobian(grad, d, n_red)

    sol = least_squares(fun, red, jac=jac, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    return float(np.max(np.abs(sol.fun))), sol.x


def _wrap(p: np.ndarray) -> np.ndarray:
    """Map phases 1..d into (-pi, pi]; phi_0 keeps its conversion offset."""
    out = p.copy()
    out[1:] = math.pi - np.mod(math.pi - out[1:], 2.0 * math.pi)
    return out


def node_residual(seq: PhaseSequence, target: ChebyshevSeries) -> float:
    """Max |Re <0|.|0> - target| over the d+1 Chebyshev nodes."""
    n = seq.degree + 1
    x = np.cos(np.pi * (np.arange(n) + 0.5) / n)
    return float(np.max(np.abs(eval_qsp_many(seq, x).real - series_eval(target, x))))


def find_phases(target: ChebyshevSeries, tol: float = DEFAULT_TOL, maxiter: int = 60) -> PhaseSequence:
    """Reflection-convention phases whose real part reproduces ``target``.

    Symmetric phases are found by Newton iteration on the positive Chebyshev
    nodes, started from the all-zero Wx point shifted to a zero real part.
    Levenberg-Marquardt is the fallback when Newton stalls.
    """
    sup = sup_norm(target)
    if sup > 1.0 + 1e-12:
        raise ValueError(f"target exceeds 1 in magnitude (sup = {sup:.3e})")
    d = target.degree
    if d == 0:
        c0 = float(np.clip(target.coeffs[0], -1.0, 1.0))
        seq = PhaseSequence(REFLECTION, [math.acos(c0)])
        res = node_residual(seq, target)
        return PhaseSequence(REFLECTION, seq.phases, res)

    n_red = (d + 2) // 2
    x = np.cos(np.arange(1, 2 * n_red, 2) * np.pi / (4 * n_red))
    f = np.asarray(series_eval(target, x))
    red0 = np.zeros(n_red)
    red0[0] = math.pi / 4.0

    inner = min(tol, 1e-12) * 0.5
    err, red = _newton(red0, d, x, f, inner, maxiter)
    if err > tol:
        err2, red2 = _least_squares(red if np.isfinite(err) else red0, d, x, f)
        if err2 < err:
            err, red = err2, red2

    wx = PhaseSequence(WX, _full_from_reduced(red, d))
    refl = wx_to_reflection(wx)
    refl = PhaseSequence(REFLECTION, _wrap(refl.phases))
    res = node_residual(refl, target)
    if not res <= tol:
        raise PhaseFindingError(f"phase finding stalled at residual {res:.3e} (tol {tol:.1e})",
                                res, refl.phases)
    return PhaseSequence(REFLECTION, refl.phases, res)


# ---------------------------------------------------------------------------
# real-part construction


@dataclass(frozen=True)
class RealPartPair:
    """Control-0 branch runs R_Phi, control-1 branch runs R_{-Phi}; Hadamards on the control."""

    plus: PhaseSequence
    minus: PhaseSequence

    def value(self, x: float) -> complex:
        return 0.5 * (eval_qsp(self.plus, x) + eval_qsp(self.minus, x))


def real_part_pair(seq: PhaseSequence) -> RealPartPair:
    if seq.convention != REFLECTION:
        raise ValueError("the real-part construction uses Reflection phases")
    return RealPartPair(seq, -seq)
