"""Classical references: forward Euler, exact propagation, fits and error metrics."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from . import _kernels
from .vlasov import PlasmaState, VelocityGrid, VlasovHamiltonian, decode_observables, initial_state, mu

HS, EULER, EXACT = "HS", "Euler", "exact"


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    E: np.ndarray  # (n_times, dims)
    f1: np.ndarray  # (n_times, n_points)
    eta: float
    source: str
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ValueError("times must be a non-empty 1-d array")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        E = np.asarray(self.E, dtype=complex)
        if E.ndim == 1:
            E = E[:, None]
        f1 = np.asarray(self.f1, dtype=complex)
        if E.shape[0] != t.size or f1.shape[0] != t.size:
            raise ValueError("record lengths disagree with times")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "f1", f1)

    def D_M(self) -> np.ndarray:
        return np.sum(np.abs(self.f1) ** 2, axis=1) * self.extra["dv"]

    def at(self, t: float) -> int:
        """Index of the record closest to time t."""
        return int(np.argmin(np.abs(self.times - t)))


# ---------------------------------------------------------------------------
# solvers


def euler_run(grid: VelocityGrid, k: float, dt: float, T: float, record_every: int | None = None,
              sample_times: Iterable[float] = (), amplitude: float = 0.1) -> Trajectory:
    """Forward Euler on dF/dt = -i(kv F + mu v E), dE/dt = -i sum mu v F (1D).

    Records every ``record_every`` steps plus the steps nearest to
    ``sample_times``. Divergence is reported, not raised.
    """
    if grid.dims != 1:
        raise ValueError("euler_run handles the 1D system")
    if not dt > 0:
        raise ValueError("dt must be positive")
    st, _ = initial_state(grid, k, amplitude)
    v = grid.points[:, 0]
    kv = float(k) * v
    w = mu(grid) * v
    nsteps = int(round(T / dt))
    if record_every is None:
        record_every = max(1, int(round(0.01 / dt)))
    steps = set(range(0, nsteps + 1, record_every))
    steps.update(min(nsteps, int(round(ts / dt))) for ts in sample_times)
    rec = np.array(sorted(steps), dtype=np.int64)
    with np.errstate(over="ignore", invalid="ignore"):
        E_all, F_rec = _kernels.euler_loop(st.F.astype(complex), complex(st.E[0]), kv.astype(float),
                                           w.astype(float), float(dt), nsteps, rec)
    f1 = -1j * np.sqrt(grid.f_m / grid.dv) * F_rec
    return Trajectory(rec * dt, E_all[rec], f1, st.eta, EULER,
                      {"dv": grid.dv, "dt": dt, "steps": rec, "F": F_rec})


def exact_run(ham: VlasovHamiltonian | np.ndarray, state0: PlasmaState | np.ndarray,
              times: Sequence[float], grid: VelocityGrid | None = None) -> Trajectory:
    """e^{-iHt} psi_0 by eigendecomposition at each requested time."""
    times = np.asarray(times, dtype=float)
    Hm = ham.H if isinstance(ham, VlasovHamiltonian) else np.asarray(ham, dtype=complex)
    if np.max(np.abs(Hm - Hm.conj().T)) > 1e-12:
        raise ValueError("H is not Hermitian")
    w, V = np.linalg.eigh(Hm)
    if isinstance(state0, PlasmaState):
        n_r = ham.n_r if isinstance(ham, VlasovHamiltonian) else 1
        psi0, eta = state0.amplitudes(n_r), state0.eta
    else:
        psi0 = np.asarray(state0, dtype=complex)
        eta = float(np.linalg.norm(psi0))
        psi0 = psi0 / eta
    c0 = V.conj().T @ psi0
    states = (V @ (np.exp(-1j * np.outer(w, times)) * c0[:, None])).T
    grid = grid if grid is not None else (ham.grid if isinstance(ham, VlasovHamiltonian) else None)
    extra = {"states": states}
    if grid is None:
        return Trajectory(times, np.zeros((times.size, 1)), states * eta, eta, EXACT, extra)
    obs = [decode_observables(s, grid, eta) for s in states]
    extra["dv"] = grid.dv
    return Trajectory(times, np.array([o.E for o in obs]), np.array([o.f1 for o in obs]), eta,
                      EXACT, extra)


# ---------------------------------------------------------------------------
# damped-cosine fit


class FitError(RuntimeError):
    def __init__(self, message: str, best=None, residual: float = math.inf):
        super().__init__(message)
        self.best = best
        self.residual = residual


@dataclass(frozen=True)
class DampedCosineFit:
    A: float
    gamma: float
    omega: float
    rho: float
    E0: float
    t0: float
    residual: float

    def __call__(self, t):
        return damped_cosine(np.asarray(t, float), self.A, self.gamma, self.omega, self.rho, self.E0, self.t0)


def damped_cosine(t, A, gamma, omega, rho, E0, t0=0.0):
    s = t - t0
    return A * np.exp(-gamma * s) * np.cos(omega * s - rho) + E0


def _initial_guess(s: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """FFT peak for omega, log-envelope slope for gamma."""
    yc = y - y.mean()
    ds = np.median(np.diff(s))
    n = max(4 * s.size, 4096)
    spec = np.abs(np.fft.rfft(yc * np.hanning(s.size), n))
    freqs = np.fft.rfftfreq(n, ds) * 2 * np.pi
    spec[0] = 0.0
    omega = float(freqs[np.argmax(spec)])
    # local maxima of |y - mean| give the envelope
    a = np.abs(yc)
    peaks = np.nonzero((a[1:-1] >= a[:-2]) & (a[1:-1] >= a[2:]))[0] + 1
    if peaks.size >= 2:
        slope = np.polyfit(s[peaks], np.log(a[peaks] + 1e-300), 1)[0]
        gamma = float(max(-slope, 0.0))
    else:
        gamma = 0.0
    amp = float(np.max(a))
    return omega, gamma, amp


def fit_damped_cosine(times, values, t0: float) -> DampedCosineFit:
    """Least-squares fit of A e^{-gamma(t-t0)} cos(omega(t-t0) - rho) + E0 on t >= t0."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    sel = times >= t0 - 1e-12
    t, y = times[sel], values[sel]
    if t.size < 20:
        raise FitError("need at least 20 samples beyond t0")
    s = t - t0
    omega0, gamma0, amp0 = _initial_guess(s, y)
    scale = float(np.max(np.abs(y))) or 1.0
    yn = y / scale

    def model(s, A, g, w, r, e0):
        return damped_cosine(s, A, g, w, r, e0)

    best, best_res = None, math.inf
    for rho0 in (0.0, 0.5 * np.pi, np.pi, 1.5 * np.pi):
        p0 = [amp0 / scale, gamma0, omega0, rho0, float(yn.mean())]
        try:
            with warnings.catch_warnings():
                # exact fits leave a singular covariance; only popt is used
                warnings.simplefilter("ignore", OptimizeWarning)
                popt, _ = curve_fit(model, s, yn, p0=p0, method="lm", maxfev=20000, xtol=1e-14, ftol=1e-14)
        except (RuntimeError, ValueError):
            continue
        res = float(np.sqrt(np.mean((model(s, *popt) - yn) ** 2)))
        if res < best_res:
            best, best_res = popt, res
    if best is None:
        raise FitError("damped-cosine fit did not converge")
    A, g, w, r, e0 = best
    if w < 0:
        w, r = -w, -r
    if A < 0:
        A, r = -A, r + np.pi
    r = float(np.pi - np.mod(np.pi - r, 2 * np.pi))
    return DampedCosineFit(float(A * scale), float(g), float(w), r, float(e0 * scale), float(t0),
                           best_res * scale)


# ---------------------------------------------------------------------------
# metrics and scaling fits


def distribution_error(f, g, dv: float) -> float:
    """delta(f, g) = sum_j |f_j - g_j|^2 dv."""
    f = np.asarray(f)
    g = np.asarray(g)
    if f.shape != g.shape:
        raise ValueError("distribution arrays differ in length")
    return float(np.sum(np.abs(f - g) ** 2) * dv)


SCALING_MODELS = {
    "OAA": ("1", "t", "log(1/eps)"),
    "R": ("1", "t", "log(1/eps)"),
    "FPAA": ("1", "t", "log(1/eps)", "t*log(1/eps)", "log(1/eps)^2"),
    "D": ("1", "log(1/eps)"),
}


def _design(model: str, t: np.ndarray, eps: np.ndarray) -> np.ndarray:
    L = np.log(1.0 / eps)
    one = np.ones_like(t)
    cols = {"OAA": [one, t, L], "R": [one, t, L], "FPAA": [one, t, L, t * L, L * L], "D": [one, L]}
    return np.column_stack(cols[model])


@dataclass(frozen=True)
class ScalingFit:
    model: str
    coeffs: np.ndarray
    terms: tuple[str, ...]
    residual_rms: float
    r_squared: float


def fit_query_scaling(samples, model: str) -> ScalingFit:
    """Linear least squares of counts on the model's basis (natural log)."""
    model = model.upper() if model.upper() in ("OAA", "FPAA") else model
    if model not in SCALING_MODELS:
        raise ValueError(f"unknown scaling model {model!r}")
    arr = np.asarray(samples, dtype=float)
    t, eps, q = arr[:, 0], arr[:, 1], arr[:, 2]
    A = _design(model, t, eps)
    if arr.shape[0] < 2 * A.shape[1]:
        raise ValueError("need at least twice as many samples as parameters")
    if np.linalg.matrix_rank(A) < A.shape[1]:
        raise ValueError("design matrix is rank deficient")
    coef, *_ = np.linalg.lstsq(A, q, rcond=None)
    resid = q - A @ coef
    ss_tot = float(np.sum((q - q.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return ScalingFit(model, coef, SCALING_MODELS[model], float(np.sqrt(np.mean(resid**2))), r2)
