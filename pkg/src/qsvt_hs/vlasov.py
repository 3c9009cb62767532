"""Linearised Vlasov-Poisson system in Schroedinger form.

State layout over registers r (high) and v (low): index ``r * N + j``.
r = 0 holds the perturbation amplitudes F_j; r = p (p = 1, 2, 3) holds the
field component E_p at v index 0. Remaining entries of the r > 0 blocks are
unused and stay zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import hs
from .simulator import StateVec

SQRT_2PI = math.sqrt(2.0 * math.pi)


def maxwellian(v):
    return np.exp(-0.5 * np.asarray(v, dtype=float) ** 2) / SQRT_2PI


def _per_axis(x, dims: int, name: str) -> tuple:
    if np.ndim(x) == 0:
        return (x,) * dims
    x = tuple(x)
    if len(x) != dims:
        raise ValueError(f"{name} needs {dims} entries")
    return x


@dataclass(frozen=True)
class VelocityGrid:
    dims: int
    N: tuple[int, ...]
    v_max: tuple[float, ...]

    def __post_init__(self):
        if self.dims not in (1, 2, 3):
            raise ValueError("dims must be 1, 2 or 3")
        for n in self.N:
            if n < 2 or n & (n - 1):
                raise ValueError(f"grid size {n} is not a power of two >= 2")
        for vm in self.v_max:
            if not vm > 0:
                raise ValueError("v_max must be positive")

    @property
    def dv_axes(self) -> tuple[float, ...]:
        return tuple(2.0 * vm / (n - 1) for n, vm in zip(self.N, self.v_max))

    @property
    def dv(self) -> float:
        """Volume element (product of per-axis spacings)."""
        return float(np.prod(self.dv_axes))

    @property
    def n_points(self) -> int:
        return int(np.prod(self.N))

    @property
    def n_qubits_v(self) -> int:
        return sum(int(math.log2(n)) for n in self.N)

    def axis(self, p: int) -> np.ndarray:
        return -self.v_max[p] + self.dv_axes[p] * np.arange(self.N[p])

    @property
    def points(self) -> np.ndarray:
        """(n_points, dims) velocities; the x index runs fastest."""
        axes = [self.axis(p) for p in range(self.dims)]
        mesh = np.meshgrid(*axes[::-1], indexing="ij")
        return np.stack([m.ravel() for m in mesh[::-1]], axis=1)

    @property
    def f_m(self) -> np.ndarray:
        return np.prod(maxwellian(self.points), axis=1)


def build_grid(dims: int, N: int | Sequence[int], v_max: float | Sequence[float]) -> VelocityGrid:
    return VelocityGrid(dims, tuple(int(n) for n in _per_axis(N, dims, "N")),
                        tuple(float(v) for v in _per_axis(v_max, dims, "v_max")))


# ---------------------------------------------------------------------------
# Hamiltonian


@dataclass(frozen=True)
class VlasovHamiltonian:
    H: np.ndarray
    alpha: float
    Lambda: float
    k: tuple[float, ...]
    grid: VelocityGrid
    angles: dict = field(compare=False)

    @property
    def dims(self) -> int:
        return self.grid.dims

    @property
    def n_r(self) -> int:
        return 1 if self.dims == 1 else 2

    @property
    def n_sys(self) -> int:
        return self.n_r + self.grid.n_qubits_v

    def coupling_from_angles(self) -> np.ndarray:
        """sqrt(1-c^2) * d * p / norm per point and axis; should equal mu v / alpha."""
        a = self.angles
        N = self.grid.n_points
        norm = {1: math.sqrt(N), 2: math.sqrt(2 * N), 3: 2.0 * math.sqrt(N)}[self.dims]
        pref = math.sqrt(a["s2"]) * a["d"] / norm
        return pref[:, None] * a["p"]

    def diagonal_from_angles(self) -> np.ndarray:
        return (self.angles["c2"] * self.angles["b"] ** 2).real


def mu(grid: VelocityGrid) -> np.ndarray:
    return np.sqrt(grid.dv * grid.f_m)


def c_squared(gamma: float) -> float:
    if gamma == 0.0:
        return 0.0
    # (gamma/2)(sqrt(1 + 4/gamma) - 1) without the cancellation at large gamma
    return 2.0 / (1.0 + math.sqrt(1.0 + 4.0 / gamma))


def build_hamiltonian(dim: int, grid: VelocityGrid, k) -> VlasovHamiltonian:
    """Dense H for the linearised system plus its block-encoding constants."""
    if grid.dims != dim:
        raise ValueError("grid dimension does not match")
    kv_vec = np.asarray(_per_axis(k, dim, "k"), dtype=float)
    pts = grid.points
    N = grid.n_points
    dv = grid.dv
    fm = grid.f_m
    kv = pts @ kv_vec
    w = mu(grid)[:, None] * pts  # mu_j v_{j,p}

    n_r = 1 if dim == 1 else 2
    size = (1 << n_r) * N
    Hm = np.zeros((size, size), dtype=complex)
    idx = np.arange(N)
    Hm[idx, idx] = kv
    for p in range(dim):
        col = (p + 1) * N
        Hm[idx, col] = w[:, p]
        Hm[col, idx] = w[:, p]

    K = float(np.max(np.abs(kv)))
    with np.errstate(invalid="ignore", divide="ignore"):
        b = np.sqrt(kv.astype(complex) / K) if K > 0 else np.zeros(N, complex)
    if dim == 1:
        v = pts[:, 0]
        vmax = grid.v_max[0]
        G = float(np.max(np.abs(v * fm)))
        X2 = dv * N * vmax * G
        d = np.sqrt(np.abs(v) * fm / G)
        p = (np.sign(v) * np.sqrt(np.abs(v) / vmax))[:, None]
    else:
        g = float(np.max(fm))
        V = float(np.prod(grid.v_max))
        X2 = (2.0 if dim == 2 else 4.0) * dv * N * V**2 * g
        d = np.sqrt(fm / g)
        p = pts / V
    gamma = K * K / X2
    c2 = c_squared(gamma)
    alpha = K / c2 if c2 > 0 else math.sqrt(X2)
    Lambda = K + math.sqrt(X2)

    for name, arr in (("b", b), ("d", d), ("p", p)):
        if np.max(np.abs(arr)) > 1.0 + 1e-12:
            raise ValueError(f"angle table {name} leaves the unit disc; variable rotation undefined")
    # 1 - c^2 = c^4 / Gamma, which keeps its digits when c^2 rounds to 1
    s2 = c2 * c2 / gamma if gamma > 0 else 1.0
    angles = {"b": b, "d": d, "p": p, "c2": c2, "s2": s2, "c": math.sqrt(c2), "Gamma": gamma,
              "K_max": K, "X2": X2}
    if dim == 1:
        angles["G_max"] = G
    else:
        angles.update(g_max=g, V_max=V)
    return VlasovHamiltonian(Hm, alpha, Lambda, tuple(kv_vec), grid, angles)


# ---------------------------------------------------------------------------
# states and observables


@dataclass(frozen=True)
class PlasmaState:
    F: np.ndarray
    E: np.ndarray
    eta: float

    def amplitudes(self, n_r: int) -> np.ndarray:
        N = self.F.size
        a = np.zeros((1 << n_r) * N, dtype=complex)
        a[:N] = self.F
        for p, e in enumerate(self.E):
            a[(p + 1) * N] = e
        return a / self.eta


def initial_state(grid: VelocityGrid, k, amplitude: float = 0.1) -> tuple[PlasmaState, StateVec]:
    """f1(v, 0) = amplitude * f_M(v) with the field fixed by Gauss's law."""
    kv_vec = np.asarray(_per_axis(k, grid.dims, "k"), dtype=float)
    k2 = float(kv_vec @ kv_vec)
    if k2 == 0.0:
        raise ValueError("k = 0 leaves E(0) undefined")
    fm = grid.f_m
    f1 = amplitude * fm
    F = 1j * np.sqrt(grid.dv / fm) * f1
    E = 1j * kv_vec / k2 * np.sum(f1) * grid.dv
    eta = math.sqrt(float(np.sum(np.abs(F) ** 2) + np.sum(np.abs(E) ** 2)))
    st = PlasmaState(F, E.astype(complex), eta)
    n_r = 1 if grid.dims == 1 else 2
    return st, StateVec(n_r + grid.n_qubits_v, st.amplitudes(n_r))


@dataclass(frozen=True)
class Observables:
    E: np.ndarray
    f1: np.ndarray
    D_M: float
    branch_norm: float = 1.0


def decode_observables(amplitudes, grid: VelocityGrid, eta: float) -> Observables:
    """Read E, f1 and D_M from the system amplitudes.

    Longer vectors are treated as ancillas on top: only the ancilla-zero
    branch is kept and renormalised.
    """
    a = amplitudes.amplitudes if isinstance(amplitudes, StateVec) else np.asarray(amplitudes, complex)
    N = grid.n_points
    n_r = 1 if grid.dims == 1 else 2
    sys_dim = (1 << n_r) * N
    branch = a[:sys_dim]
    norm = float(np.linalg.norm(branch))
    if norm < 1e-12:
        raise RuntimeError("ancilla-zero branch has vanished")
    branch = branch / norm
    E = eta * branch[N * np.arange(1, grid.dims + 1)]
    f1 = -1j * np.sqrt(grid.f_m / grid.dv) * eta * branch[:N]
    D_M = float(np.sum(np.abs(f1) ** 2) * grid.dv)
    return Observables(E, f1, D_M, norm)


def qae_iterations(E_u: float | None, eta: float, delta: float) -> int:
    """Amplitude-estimation rounds for |E|^2 to additive precision delta."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if E_u is None:
        E_u = eta
    if E_u < 0 or eta <= 0:
        raise ValueError("need E_u >= 0 and eta > 0")
    return int(math.ceil((2.0 * E_u + 1.0) * math.pi * eta / delta))


def qae_error_bound(a: float, eta: float, M: int) -> float:
    """Worst-case |a_est - a| for a = |E|^2 after M amplitude-estimation rounds."""
    return 2.0 * math.pi * math.sqrt(max(0.0, a * (eta * eta - a))) / M + (math.pi * eta / M) ** 2


def variable_rotation(x: complex) -> np.ndarray:
    """2x2 unitary whose first column is (x, sqrt(1 - |x|^2)) for real x.

    Complex x uses e^{-iX arccos(Im x)} e^{iZ pi/2}; only the first entry's
    magnitude is pinned in that case.
    """
    if abs(x) > 1.0 + 1e-12:
        raise ValueError("variable rotation needs |x| <= 1")
    if np.iscomplexobj(x) and np.imag(x) != 0.0:
        th = math.acos(float(np.clip(np.imag(x), -1.0, 1.0)))
        rx = np.array([[math.cos(th), -1j * math.sin(th)], [-1j * math.sin(th), math.cos(th)]])
        rzp = np.diag([1j, -1j])
        return rx @ rzp
    xr = float(np.clip(np.real(x), -1.0, 1.0))
    s = math.sqrt(max(0.0, 1.0 - xr * xr))
    return np.array([[xr, -s], [s, xr]], dtype=complex)


# ---------------------------------------------------------------------------
# evolution


def evolve_hs(ham: VlasovHamiltonian, state0: PlasmaState, n_steps: int, eps: float,
              dt: float | None = None, tol: float = 1e-8):
    """Repeat the OAA step n_steps times, keeping the ancilla-zero branch each step."""
    from .baseline import Trajectory

    dt = 1.0 / ham.alpha if dt is None else float(dt)
    step = hs.build_hs_step(ham.H, ham.alpha, dt, eps, tol)
    U = step.unitary.matrix
    gp = step.global_phase
    sys_dim = ham.H.shape[0]
    psi = state0.amplitudes(ham.n_r)

    Es, fs, norms = [], [], []
    for step_i in range(n_steps + 1):
        ob = decode_observables(psi, ham.grid, state0.eta)
        Es.append(ob.E)
        fs.append(ob.f1)
        if step_i == n_steps:
            break
        out = U[:, :sys_dim] @ psi
        branch = out[:sys_dim] / gp
        nrm = np.linalg.norm(branch)
        norms.append(nrm)
        psi = branch / nrm
    times = dt * np.arange(n_steps + 1)
    return Trajectory(times, np.array(Es), np.array(fs), state0.eta, "HS",
                      {"branch_norms": np.array(norms), "step_err": step.err,
                       "queries_per_step": step.queries, "dv": ham.grid.dv, "psi_final": psi})
