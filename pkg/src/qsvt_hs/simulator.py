"""Dense unitary emulation for small registers.

Qubit 0 is the least significant bit of a basis index. Ancilla registers sit
on the most significant qubits, so the <0|_anc U |0>_anc block is the top-left
submatrix of U.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 16
UNITARY_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)


def rz(phi: float) -> np.ndarray:
    """e^{-i phi Z}."""
    return np.diag([np.exp(-1j * phi), np.exp(1j * phi)])


def phase(phi: float) -> np.ndarray:
    """diag(1, e^{i phi})."""
    return np.diag([1.0, np.exp(1j * phi)]).astype(complex)


def _check_width(n: int) -> None:
    if n < 0 or n > MAX_QUBITS:
        raise ValueError(f"register width {n} outside [0, {MAX_QUBITS}]")


def unitarity_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


@dataclass(frozen=True)
class DenseUnitary:
    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        _check_width(self.n_qubits)
        m = np.asarray(self.matrix, dtype=complex)
        dim = 1 << self.n_qubits
        if m.shape != (dim, dim):
            raise ValueError(f"matrix shape {m.shape} does not match {self.n_qubits} qubits")
        defect = unitarity_defect(m)
        if defect > UNITARY_TOL:
            raise ValueError(f"matrix is not unitary (defect {defect:.2e})")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def dagger(self) -> "DenseUnitary":
        return DenseUnitary(self.n_qubits, self.matrix.conj().T)


@dataclass(frozen=True)
class StateVec:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_width(self.n_qubits)
        a = np.asarray(self.amplitudes, dtype=complex).ravel()
        if a.size != 1 << self.n_qubits:
            raise ValueError("amplitude count does not match width")
        norm = float(np.vdot(a, a).real)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state is not normalised (|psi|^2 = {norm:.12f})")
        object.__setattr__(self, "amplitudes", a)


def _validate_operands(n: int, targets: Sequence[int], controls: Sequence[tuple[int, int]]) -> None:
    used = list(targets) + [q for q, _ in controls]
    if len(set(used)) != len(used):
        raise ValueError("targets and controls overlap")
    for q in used:
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} outside a {n}-qubit register")
    for _, pol in controls:
        if pol not in (0, 1):
            raise ValueError("control polarity must be 0 or 1")


def apply_gate(mat: np.ndarray, gate: np.ndarray, targets: Sequence[int],
               controls: Iterable[tuple[int, int]] = (), n_qubits: int | None = None) -> np.ndarray:
    """Left-multiply ``mat`` (2^n rows) by ``gate`` on ``targets`` under ``controls``.

    ``gate`` index bit i corresponds to ``targets[i]``. Works on statevectors
    (1-d) or matrices (columns are states). Returns a new array.
    """
    mat = np.asarray(mat)
    vec = mat.ndim == 1
    cols = mat.reshape(mat.shape[0], -1)
    n = int(np.log2(cols.shape[0])) if n_qubits is None else n_qubits
    targets = list(targets)
    controls = list(controls)
    _validate_operands(n, targets, controls)
    k = len(targets)
    if gate.shape != (1 << k, 1 << k):
        raise ValueError("gate size does not match number of targets")

    # tensor axis a <-> qubit n-1-a; last axis holds the columns
    ax = lambda q: n - 1 - q  # noqa: E731
    front = [ax(q) for q in reversed(targets)] + [ax(q) for q, _ in controls]
    rest = [a for a in range(n) if a not in front]
    perm = front + rest + [n]
    T = cols.reshape([2] * n + [cols.shape[1]]).transpose(perm)
    T = np.ascontiguousarray(T).reshape(1 << k, 1 << len(controls), -1)
    ci = 0
    for _, pol in controls:
        ci = (ci << 1) | pol
    out = T.astype(np.result_type(T, gate), copy=True)
    out[:, ci, :] = gate @ out[:, ci, :]
    out = out.reshape([2] * n + [cols.shape[1]]).transpose(np.argsort(perm))
    out = np.ascontiguousarray(out).reshape(cols.shape[0], cols.shape[1])
    return out.ravel() if vec else out.reshape(mat.shape)


def embed_gate(gate: np.ndarray, targets: Sequence[int], controls: Iterable[tuple[int, int]] = (),
               n_qubits: int | None = None) -> DenseUnitary:
    """Full-width unitary that applies ``gate`` on ``targets`` when every control matches."""
    gate = np.asarray(gate, dtype=complex)
    if unitarity_defect(gate) > UNITARY_TOL:
        raise ValueError("gate is not unitary")
    controls = list(controls)
    if n_qubits is None:
        n_qubits = max(list(targets) + [q for q, _ in controls]) + 1
    _check_width(n_qubits)
    eye = np.eye(1 << n_qubits, dtype=complex)
    return DenseUnitary(n_qubits, apply_gate(eye, gate, targets, controls, n_qubits))


def compose(sequence: Sequence[DenseUnitary]) -> DenseUnitary:
    """Product with the first listed unitary acting first."""
    if not sequence:
        raise ValueError("compose needs at least one unitary")
    n = sequence[0].n_qubits
    if any(u.n_qubits != n for u in sequence):
        raise ValueError("width mismatch in compose")
    m = sequence[0].matrix
    for u in sequence[1:]:
        m = u.matrix @ m
    return DenseUnitary(n, m)


def project_block(U: DenseUnitary | np.ndarray, n_anc: int) -> np.ndarray:
    """<0|_anc U |0>_anc with ancillas on the top ``n_anc`` qubits."""
    m = U.matrix if isinstance(U, DenseUnitary) else np.asarray(U)
    n = int(round(np.log2(m.shape[0])))
    if not 0 <= n_anc < n:
        raise ValueError("need 0 <= n_anc < n_qubits")
    d = 1 << (n - n_anc)
    return m[:d, :d].copy()


def direct_block_encoding(Hm: np.ndarray, alpha: float) -> DenseUnitary:
    """[[A, S], [S, -A]] with A = H/alpha and S = sqrt(I - A^2); one ancilla on top."""
    Hm = np.asarray(Hm, dtype=complex)
    if Hm.ndim != 2 or Hm.shape[0] != Hm.shape[1]:
        raise ValueError("H must be square")
    dim = Hm.shape[0]
    n_sys = int(round(np.log2(dim)))
    if 1 << n_sys != dim:
        raise ValueError("H dimension must be a power of two")
    if np.max(np.abs(Hm - Hm.conj().T)) > 1e-12:
        raise ValueError("H is not Hermitian")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    Hm = 0.5 * (Hm + Hm.conj().T)
    A = Hm / alpha
    w, v = np.linalg.eigh(A)
    if np.max(np.abs(w)) > 1.0 + 1e-12:
        raise ValueError(f"||H|| = {alpha * np.max(np.abs(w)):.6g} exceeds alpha = {alpha:.6g}")
    w = np.clip(w, -1.0, 1.0)
    # functions of A share its eigenbasis, so the completion commutes with A
    A = (v * w) @ v.conj().T
    S = (v * np.sqrt(np.clip(1.0 - w * w, 0.0, None))) @ v.conj().T
    U = np.block([[A, S], [S, -A]])
    return DenseUnitary(n_sys + 1, U)
