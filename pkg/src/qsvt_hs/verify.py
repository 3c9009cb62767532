"""Quick invariant suites; each check returns (name, passed, detail)."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import hs
from . import polyapprox as pa
from . import qsp
from . import simulator as sim
from . import vlasov as vl

Check = tuple[str, bool, str]


def random_psd(rng: np.random.Generator, n_qubits: int, scale: float = 0.95) -> np.ndarray:
    dim = 1 << n_qubits
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    Hm = A @ A.conj().T
    return scale * Hm / np.linalg.norm(Hm, 2)


def random_hermitian(rng: np.random.Generator, n_qubits: int) -> np.ndarray:
    dim = 1 << n_qubits
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (A + A.conj().T)


def check_parity(rng) -> Check:
    worst = 0.0
    for _ in range(10):
        t = rng.uniform(0.1, 10)
        eps = 10 ** rng.uniform(-10, -1)
        pc, ps, _ = pa.build_trig_polys(t, eps)
        x = rng.uniform(-1, 1, 20)
        worst = max(worst, np.max(np.abs(pc(x) - pc(-x))), np.max(np.abs(ps(x) + ps(-x))))
    return "series parity", worst <= 1e-12, f"max defect {worst:.1e}"


def check_trig_certificate(rng, n: int = 50) -> Check:
    worst = 0.0
    xs = np.linspace(-1, 1, pa.GRID_POINTS)
    for _ in range(n):
        t = rng.uniform(0.1, 20)
        eps = 10 ** rng.uniform(-12, math.log10(0.3))
        pc, ps, kappa = pa.build_trig_polys(t, eps)
        err = np.max(np.abs(kappa * np.exp(-1j * xs * t) / 2 - (pc(xs) - 1j * ps(xs)) / 2))
        worst = max(worst, err / (kappa * eps))
    return "trig certificate", worst <= 1.0 + 1e-6, f"max err/bound {worst:.3f}"


def check_sign_certificate(rng, n: int = 20) -> Check:
    worst = 0.0
    for _ in range(n):
        delta = rng.uniform(0.1, 1.0)
        eps = 10 ** rng.uniform(-6, math.log10(pa.SIGN_EPS_MAX))
        s = pa.build_sign_poly(delta, eps)
        worst = max(worst, pa.sampled_error(s) / eps)
    return "sign certificate", worst <= 1.0, f"max err/bound {worst:.3f}"


def check_convention_roundtrip(rng, n: int = 20) -> Check:
    worst = 0.0
    xs = np.linspace(-1, 1, 101)
    for _ in range(n):
        d = int(rng.integers(1, 12))
        wx = qsp.PhaseSequence(qsp.WX, rng.uniform(-np.pi, np.pi, d + 1))
        rf = qsp.wx_to_reflection(wx)
        worst = max(worst, np.max(np.abs(qsp.eval_qsp_many(wx, xs) - qsp.eval_qsp_many(rf, xs))))
    return "Wx/Reflection agreement", worst <= 1e-12, f"max diff {worst:.1e}"


def check_negation(rng, n: int = 20) -> Check:
    worst = 0.0
    xs = np.linspace(-1, 1, 101)
    for _ in range(n):
        seq = qsp.PhaseSequence(qsp.REFLECTION, rng.uniform(-np.pi, np.pi, int(rng.integers(2, 10))))
        worst = max(worst, np.max(np.abs(qsp.eval_qsp_many(-seq, xs) - np.conj(qsp.eval_qsp_many(seq, xs)))))
    return "R_{-Phi} conjugation", worst <= 1e-12, f"max diff {worst:.1e}"


def check_u_dash(rng, n: int = 100) -> Check:
    worst = 0.0
    for _ in range(n):
        Hm = random_hermitian(rng, int(rng.integers(1, 3)))
        alpha = np.linalg.norm(Hm, 2) * rng.uniform(1.0, 2.0)
        base = hs.BlockEncodedOp(sim.direct_block_encoding(Hm, alpha), alpha, int(np.log2(Hm.shape[0])))
        up, _ = hs.shift_rescale_encoding(base, 1.0)
        target = (Hm / alpha + np.eye(Hm.shape[0])) / 2
        worst = max(worst, np.max(np.abs(up.block() - target)))
    return "U' block", worst <= 1e-12, f"max diff {worst:.1e}"


def random_grid(rng, dim: int) -> tuple[vl.VelocityGrid, tuple]:
    N = tuple(int(2 ** rng.integers(1, 6 if dim == 1 else 4)) for _ in range(dim))
    vmax = tuple(float(rng.uniform(1.0, 8.0)) for _ in range(dim))
    k = tuple(float(rng.uniform(-2, 2)) for _ in range(dim))
    return vl.build_grid(dim, N, vmax), k


def check_alpha_bounds(rng, n: int = 200) -> Check:
    bad = 0
    for dim in (1, 2, 3):
        for _ in range(n):
            grid, k = random_grid(rng, dim)
            h = vl.build_hamiltonian(dim, grid, k)
            if not (0.8 * h.Lambda - 1e-12 <= h.alpha <= h.Lambda + 1e-12):
                bad += 1
    return "4 Lambda/5 <= alpha <= Lambda", bad == 0, f"{bad} violations over {3 * n} configs"


def check_coupling_identity(rng, n: int = 20) -> Check:
    worst = 0.0
    for dim in (2, 3):
        for _ in range(n):
            grid, k = random_grid(rng, dim)
            h = vl.build_hamiltonian(dim, grid, k)
            w = vl.mu(grid)[:, None] * grid.points / h.alpha
            worst = max(worst, np.max(np.abs(h.coupling_from_angles() - w)))
            worst = max(worst, np.max(np.abs(h.diagonal_from_angles() - grid.points @ np.array(k) / h.alpha)))
    return "2D/3D coupling identity", worst <= 1e-10, f"max diff {worst:.1e}"


def check_oaa_certificate(rng, n: int = 3) -> Check:
    worst = 0.0
    for _ in range(n):
        Hm = random_psd(rng, int(rng.integers(1, 3)))
        base = hs.BlockEncodedOp(sim.direct_block_encoding(Hm, 1.0), 1.0, int(np.log2(Hm.shape[0])))
        for t in (0.5, 2.0):
            eps = 1e-3
            op = hs.build_oaa(hs.build_u_exp(base, t, eps / 9))
            err = np.linalg.norm(hs.expm_herm(Hm, t) - op.encoded(), 2)
            worst = max(worst, err / (eps + hs.certified_slack(op)))
    return "OAA certificate", worst <= 1.0, f"max err/bound {worst:.3f}"


SUITES: dict[str, Callable] = {
    "parity": check_parity,
    "trig": check_trig_certificate,
    "sign": check_sign_certificate,
    "conventions": check_convention_roundtrip,
    "negation": check_negation,
    "u_dash": check_u_dash,
    "alpha": check_alpha_bounds,
    "coupling": check_coupling_identity,
    "oaa": check_oaa_certificate,
}


def run_all(seed: int = 0, only: list[str] | None = None) -> list[Check]:
    rng = np.random.default_rng(seed)
    names = only or list(SUITES)
    return [SUITES[name](rng) for name in names]
