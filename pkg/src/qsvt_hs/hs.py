"""QSVT Hamiltonian simulation: U_exp, OAA, FPAA, shift-rescale, time extension, query counts.

Register layout inside every assembled unitary (least significant first):
system qubits, the base encoding's ancillas, then b, c (U_exp), then d
(amplification helper). Phase rotations conditioned on the projector onto
the all-zero ancilla state are realised with a helper qubit: a zero-controlled
X onto the helper, a Z rotation on the helper, and the same X again.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import polyapprox as pa
from .qsp import DEFAULT_TOL, find_phases
from .simulator import H as HAD
from .simulator import X, Z, DenseUnitary, apply_gate, phase, project_block, rz

OAA = "OAA"
FPAA = "FPAA"
OAA_PHASES = (-1.5 * math.pi, 0.5 * math.pi, 0.5 * math.pi, 0.5 * math.pi)


@dataclass(frozen=True)
class BlockEncodedOp:
    """``alpha * <0|unitary|0>`` approximates the encoded matrix within ``err``.

    ``offset`` marks an identity shift baked into the encoded matrix (the
    shift-rescale construction); ``global_phase`` is the known scalar the
    block carries relative to e^{-iHt}.
    """

    unitary: DenseUnitary
    alpha: float
    n_sys: int
    err: float = 0.0
    queries: int = 1
    global_phase: complex = 1.0
    offset: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not 0 <= self.n_sys <= self.unitary.n_qubits:
            raise ValueError("system width exceeds the unitary")

    @property
    def n_qubits(self) -> int:
        return self.unitary.n_qubits

    @property
    def n_anc(self) -> int:
        return self.unitary.n_qubits - self.n_sys

    def block(self) -> np.ndarray:
        if self.n_anc == 0:
            return self.unitary.matrix.copy()
        return project_block(self.unitary, self.n_anc)

    def encoded(self) -> np.ndarray:
        """alpha * block with the recorded global phase divided out."""
        return self.alpha * self.block() / self.global_phase


@dataclass(frozen=True)
class QueryCount:
    method: str
    t: float
    eps: float
    Q: int
    breakdown: dict

    def recompute(self) -> int:
        b = self.breakdown
        if self.method == OAA:
            return 3 * (2 * b["R"] + 1)
        return b["D"] * (2 * b["R"] + 1)


def expm_herm(Hm: np.ndarray, t: float) -> np.ndarray:
    """e^{-iHt} for Hermitian H by eigendecomposition."""
    w, v = np.linalg.eigh(Hm)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


# ---------------------------------------------------------------------------
# circuit helpers on full-width matrices


def _pi_phase(M, branches, pi_qubits, helper, n):
    """exp(i phi (2 Pi - I)) for helper |0>, sign flipped for helper |1>.

    ``branches`` lists (phi, controls) pairs; each rotation fires only on its
    control pattern, which lets one helper carry branch-dependent phases.
    """
    zero_ctrl = [(q, 0) for q in pi_qubits]
    M = apply_gate(M, X, [helper], zero_ctrl, n)
    for phi, ctrls in branches:
        M = apply_gate(M, rz(phi), [helper], ctrls, n)
    return apply_gate(M, X, [helper], zero_ctrl, n)


def _qsvt_sequence(M, phases, U, m, pi_qubits, helper, n, extra_controls=()):
    """Alternating sequence: phi_d, U, phi_{d-1}, U^dag, ..., phi_0 in time order."""
    Ud = U.conj().T
    d = len(phases) - 1
    targets = list(range(m))
    M = _pi_phase(M, [(phases[d], list(extra_controls))], pi_qubits, helper, n)
    for s in range(1, d + 1):
        M = apply_gate(M, U if s % 2 == 1 else Ud, targets, extra_controls, n)
        M = _pi_phase(M, [(phases[d - s], list(extra_controls))], pi_qubits, helper, n)
    return M


def _check_psd_unit(U_H: BlockEncodedOp) -> None:
    if abs(U_H.alpha - 1.0) > 1e-12:
        raise ValueError("U_exp needs an encoding with alpha = 1")
    A = U_H.block()
    if np.max(np.abs(A - A.conj().T)) > 1e-10:
        raise ValueError("encoded matrix is not Hermitian")
    w = np.linalg.eigvalsh(0.5 * (A + A.conj().T))
    if w.min() < -1e-10 or w.max() > 1.0 + 1e-10:
        raise ValueError("encoded matrix must be positive semidefinite with norm <= 1")


# ---------------------------------------------------------------------------
# U_exp


@lru_cache(maxsize=256)
def _trig_phases(t: float, eps_tri: float, tol: float):
    p_cos, p_sin, kappa = pa.build_trig_polys(t, eps_tri)
    return find_phases(p_cos, tol), find_phases(p_sin, tol), kappa, (p_cos.degree) // 2


def build_u_exp(U_H: BlockEncodedOp, t: float, eps_tri: float, tol: float = DEFAULT_TOL) -> BlockEncodedOp:
    """(1, a+2, kappa*eps_tri) encoding of kappa e^{-iHt}/2 from 2R+1 queries.

    b (qubit m) is both the phase helper and the real-part control, c (qubit
    m+1) selects the cosine or sine phase schedule. The sine schedule needs one
    extra controlled query at the end.
    """
    _check_psd_unit(U_H)
    phi_c, phi_s, kappa, R = _trig_phases(float(t), float(eps_tri), float(tol))
    m = U_H.n_qubits
    b, c = m, m + 1
    n = m + 2
    pi_qubits = list(range(U_H.n_sys, m))
    U = U_H.unitary.matrix
    Ud = U.conj().T
    targets = list(range(m))
    pc, ps = phi_c.phases, phi_s.phases

    M = np.eye(1 << n, dtype=complex)
    M = apply_gate(M, HAD, [b], (), n)
    M = apply_gate(M, HAD, [c], (), n)
    for i in range(2 * R + 1):
        # S_2 pair: cosine phase on c=0, sine phase on c=1
        M = _pi_phase(M, [(pc[2 * R - i], [(c, 0)]), (ps[2 * R + 1 - i], [(c, 1)])], pi_qubits, b, n)
        if i < 2 * R:
            M = apply_gate(M, U if i % 2 == 0 else Ud, targets, (), n)
    M = apply_gate(M, U, targets, [(c, 1)], n)
    M = _pi_phase(M, [(ps[0], [(c, 1)])], pi_qubits, b, n)
    M = apply_gate(M, phase(-0.5 * math.pi), [c], (), n)
    M = apply_gate(M, HAD, [b], (), n)
    M = apply_gate(M, HAD, [c], (), n)

    gp = complex(np.exp(-1j * U_H.offset * t))
    meta = {"t": t, "eps_tri": eps_tri, "kappa": kappa, "R": R, "degree": 2 * R + 1,
            "phase_residual": max(phi_c.residual, phi_s.residual), "phase_tol": tol}
    return BlockEncodedOp(DenseUnitary(n, M), 1.0, U_H.n_sys, kappa * eps_tri,
                          (2 * R + 1) * U_H.queries, gp, U_H.offset, meta)


# ---------------------------------------------------------------------------
# amplification


def build_oaa(u_exp: BlockEncodedOp) -> BlockEncodedOp:
    """T_3 amplification of a kappa/2-scaled unitary block: three uses of u_exp.

    The T_3 sign (T_3(1/2) = -1) is folded away by an X Z X on the helper, so
    the block approximates +e^{-iHt} times the recorded global phase.
    """
    m = u_exp.n_qubits
    d = m
    n = m + 1
    pi_qubits = list(range(u_exp.n_sys, m))
    M = np.eye(1 << n, dtype=complex)
    M = _qsvt_sequence(M, OAA_PHASES, u_exp.unitary.matrix, m, pi_qubits, d, n)
    for g in (X, Z, X):
        M = apply_gate(M, g, [d], (), n)
    eps_tri = u_exp.meta.get("eps_tri", u_exp.err)
    meta = dict(u_exp.meta)
    meta.update(method=OAA, degree=3 * u_exp.meta.get("degree", 1))
    return BlockEncodedOp(DenseUnitary(n, M), 1.0, u_exp.n_sys, 9.0 * eps_tri,
                          3 * u_exp.queries, u_exp.global_phase, u_exp.offset, meta)


def fpaa_budget(eps_sign: float, D: int, eps_tri: float) -> float:
    return 2.0 * (eps_sign + math.sqrt(3.0) * D * eps_tri)


@lru_cache(maxsize=64)
def _sign_phases(kappa: float, eps_sign: float, eps_tri: float, tol: float):
    _, D = pa.sign_degree(kappa, eps_sign)
    eps_prime = eps_sign + math.sqrt(3.0) * D * eps_tri
    target = pa.build_sign_poly(kappa, eps_sign).scaled(1.0 / (1.0 + eps_prime))
    return find_phases(target, tol), D, eps_prime


def build_fpaa(u_exp: BlockEncodedOp, eps_sign: float, tol: float = DEFAULT_TOL) -> BlockEncodedOp:
    """Sign-polynomial amplification with Delta = kappa; real part taken through the helper."""
    kappa = u_exp.meta["kappa"]
    eps_tri = u_exp.meta["eps_tri"]
    phi, D, eps_prime = _sign_phases(float(kappa), float(eps_sign), float(eps_tri), float(tol))

    m = u_exp.n_qubits
    d = m
    n = m + 1
    pi_qubits = list(range(u_exp.n_sys, m))
    M = np.eye(1 << n, dtype=complex)
    M = apply_gate(M, HAD, [d], (), n)
    M = _qsvt_sequence(M, phi.phases, u_exp.unitary.matrix, m, pi_qubits, d, n)
    M = apply_gate(M, HAD, [d], (), n)
    meta = dict(u_exp.meta)
    meta.update(method=FPAA, D=D, eps_sign=eps_sign, eps_prime=eps_prime,
                degree=D * u_exp.meta.get("degree", 1),
                phase_residual=max(phi.residual, u_exp.meta.get("phase_residual", 0.0)))
    return BlockEncodedOp(DenseUnitary(n, M), 1.0, u_exp.n_sys, fpaa_budget(eps_sign, D, eps_tri),
                          D * u_exp.queries, u_exp.global_phase, u_exp.offset, meta)


# ---------------------------------------------------------------------------
# general Hamiltonians and longer times


def shift_rescale_encoding(U: BlockEncodedOp, t: float) -> tuple[BlockEncodedOp, float]:
    """Encode (H/alpha + I)/2 with one extra ancilla; evolution time becomes 2 alpha t.

    Returned op has ``offset = 1/2``, so downstream builders record the global
    phase e^{-i t_eff / 2}.
    """
    A = U.block()
    w = np.linalg.eigvalsh(0.5 * (A + A.conj().T))
    if np.max(np.abs(w)) > 1.0 + 1e-10:
        raise ValueError("||H/alpha|| exceeds 1")
    m = U.n_qubits
    a = m
    n = m + 1
    M = np.eye(1 << n, dtype=complex)
    M = apply_gate(M, HAD, [a], (), n)
    M = apply_gate(M, U.unitary.matrix, list(range(m)), [(a, 0)], n)
    M = apply_gate(M, HAD, [a], (), n)
    meta = {"alpha_in": U.alpha}
    op = BlockEncodedOp(DenseUnitary(n, M), 1.0, U.n_sys, U.err / (2.0 * U.alpha),
                        U.queries, 1.0, 0.5, meta)
    return op, 2.0 * U.alpha * t


def extend_time(step: BlockEncodedOp, n_steps: int) -> BlockEncodedOp:
    """step^N on the full register (no ancilla reset); error adds up linearly."""
    if int(n_steps) != n_steps or n_steps < 1:
        raise ValueError("n_steps must be a positive integer")
    n_steps = int(n_steps)
    if n_steps == 1:
        return step
    M = np.linalg.matrix_power(step.unitary.matrix, n_steps)
    meta = dict(step.meta)
    meta["n_steps"] = n_steps
    return BlockEncodedOp(DenseUnitary(step.n_qubits, M), step.alpha, step.n_sys, n_steps * step.err,
                          n_steps * step.queries, step.global_phase**n_steps, step.offset, meta)


def build_hs_step(Hm: np.ndarray, alpha: float, dt: float, eps: float,
                  tol: float = DEFAULT_TOL) -> BlockEncodedOp:
    """OAA encoding of e^{-iH dt} for an indefinite Hermitian H with ||H|| <= alpha."""
    from .simulator import direct_block_encoding

    base = BlockEncodedOp(direct_block_encoding(Hm, alpha), alpha, int(round(math.log2(Hm.shape[0]))))
    shifted, t_eff = shift_rescale_encoding(base, dt)
    return build_oaa(build_u_exp(shifted, t_eff, eps / 9.0, tol))


def certified_slack(op: BlockEncodedOp) -> float:
    """degree x phase tolerance, added to every certified bound."""
    return op.meta.get("degree", 1) * op.meta.get("phase_tol", DEFAULT_TOL)


# ---------------------------------------------------------------------------
# query counting


def _q_oaa(t: float, eps: float) -> tuple[int, dict]:
    R = pa.truncation_index_closed(t, eps / 9.0)
    return 3 * (2 * R + 1), {"R": R, "eps_tri": eps / 9.0}


@lru_cache(maxsize=200_000)
def _sign_D(delta: float, eps_sign: float) -> int:
    return pa.sign_degree(delta, eps_sign)[1]


def _fpaa_point(t: float, eps: float, eps_tri: float, rounds: int = 20):
    if not eps_tri < pa.INV_E:
        return None
    kappa = 1.0 / (1.0 + eps_tri)
    s3 = math.sqrt(3.0)
    es = min(eps / 2.0, pa.SIGN_EPS_MAX)
    for _ in range(rounds):
        if es <= 0:
            return None
        D = _sign_D(kappa, min(es, pa.SIGN_EPS_MAX))
        nxt = min(eps / 2.0 - s3 * D * eps_tri, pa.SIGN_EPS_MAX)
        if nxt == es:
            break
        es = nxt
    if es <= 0:
        return None
    D = _sign_D(kappa, es)
    if fpaa_budget(es, D, eps_tri) > eps * (1.0 + 1e-12):
        return None
    R = pa.truncation_index_closed(t, eps_tri)
    return D * (2 * R + 1), {"R": R, "D": D, "eps_tri": eps_tri, "eps_sign": es}


def _q_fpaa(t: float, eps: float, n_grid: int = 40) -> tuple[int, dict]:
    hi = eps / (2.0 * math.sqrt(3.0))
    best = None
    for et in np.geomspace(1e-14, hi, n_grid):
        pt = _fpaa_point(t, eps, float(et))
        if pt is not None and (best is None or pt[0] < best[0]):
            best = pt
    if best is None:
        raise ValueError(f"no feasible (eps_tri, eps_sign) pair for t={t}, eps={eps}")
    return best


@lru_cache(maxsize=100_000)
def query_count(method: str, t: float, eps: float) -> QueryCount:
    """Queries to the base encoding needed for an eps-accurate e^{-iHt}."""
    method = method.upper()
    if not t > 0:
        raise ValueError("t must be positive")
    if not 0 < eps <= 0.9:
        raise ValueError("eps must lie in (0, 0.9]")
    if method == OAA:
        Q, br = _q_oaa(t, eps)
    elif method == FPAA:
        Q, br = _q_fpaa(t, eps)
    else:
        raise ValueError(f"unknown method {method!r}")
    return QueryCount(method, t, eps, Q, br)


