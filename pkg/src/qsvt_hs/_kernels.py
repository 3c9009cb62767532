"""Hot loops with a numba path and a pure-numpy path.

Set ``QSVT_HS_DISABLE_NUMBA=1`` before import to force the numpy versions.
Both variants stay importable under explicit names so tests and the
benchmark can compare them directly.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("QSVT_HS_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:  # pragma: no cover - exercised implicitly by the import
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


USE_NUMBA = HAVE_NUMBA and not _DISABLED


# ---------------------------------------------------------------------------
# Clenshaw evaluation of sum_k c_k T_k(x)


def clenshaw_numpy(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    b1 = np.zeros_like(x)
    b2 = np.zeros_like(x)
    two_x = 2.0 * x
    for c in coeffs[:0:-1]:
        b1, b2 = c + two_x * b1 - b2, b1
    return coeffs[0] + x * b1 - b2


@njit(cache=True)
def clenshaw_numba(coeffs, x):
    # coefficient loop outside so the inner loop over x vectorises
    m = x.shape[0]
    b1 = np.zeros(m)
    b2 = np.zeros(m)
    for k in range(coeffs.shape[0] - 1, 0, -1):
        c = coeffs[k]
        for i in range(m):
            tmp = c + 2.0 * x[i] * b1[i] - b2[i]
            b2[i] = b1[i]
            b1[i] = tmp
    out = np.empty(m)
    for i in range(m):
        out[i] = coeffs[0] + x[i] * b1[i] - b2[i]
    return out


# ---------------------------------------------------------------------------
# Wx-convention QSP: value and gradient of Re <0|W_Phi|0> at many nodes.
#
# U(x) = e^{i phi_0 Z} W(x) e^{i phi_1 Z} ... W(x) e^{i phi_d Z},
# W(x) = [[x, i s], [i s, x]],  s = sqrt(1 - x^2).


def wx_value_grad_numpy(phases: np.ndarray, x: np.ndarray):
    d = phases.shape[0] - 1
    n = x.shape[0]
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    W = np.empty((n, 2, 2), dtype=complex)
    W[:, 0, 0] = x
    W[:, 1, 1] = x
    W[:, 0, 1] = 1j * s
    W[:, 1, 0] = 1j * s
    ph = np.exp(1j * np.outer(phases, [1.0, -1.0]))  # (d+1, 2) diagonal entries

    # left[j] = S_0 W S_1 W ... S_{j-1} W ; right[j] = W S_{j+1} ... W S_d
    left = np.empty((d + 1, n, 2, 2), dtype=complex)
    left[0] = np.eye(2)
    for j in range(1, d + 1):
        left[j] = (left[j - 1] * ph[j - 1][None, None, :]) @ W
    right = np.empty((d + 1, n, 2, 2), dtype=complex)
    right[d] = np.eye(2)
    for j in range(d - 1, -1, -1):
        right[j] = (W * ph[j + 1][None, None, :]) @ right[j + 1]

    full = (left[0] * ph[0][None, None, :]) @ right[0]
    grad = np.empty((n, d + 1))
    dz = np.array([1j, -1j])
    for j in range(d + 1):
        # first row of left[j] times diag(i e^{i phi}, -i e^{-i phi}) times first column of right[j]
        row = left[j][:, 0, :] * (dz * ph[j])[None, :]
        grad[:, j] = np.einsum("ni,ni->n", row, right[j][:, :, 0]).real
    return full[:, 0, 0], grad


@njit(cache=True)
def wx_value_grad_numba(phases, x):
    d = phases.shape[0] - 1
    n = x.shape[0]
    val = np.empty(n, dtype=np.complex128)
    grad = np.empty((n, d + 1))
    ep = np.empty(d + 1, dtype=np.complex128)
    em = np.empty(d + 1, dtype=np.complex128)
    for j in range(d + 1):
        ep[j] = np.exp(1j * phases[j])
        em[j] = np.exp(-1j * phases[j])
    # only the first row of left products and first column of right products are needed
    la = np.empty(d + 1, dtype=np.complex128)
    lb = np.empty(d + 1, dtype=np.complex128)
    ra = np.empty(d + 1, dtype=np.complex128)
    rb = np.empty(d + 1, dtype=np.complex128)
    for i in range(n):
        xi = x[i]
        si = 1j * np.sqrt(max(0.0, 1.0 - xi * xi))
        la[0] = 1.0
        lb[0] = 0.0
        for j in range(1, d + 1):
            a = la[j - 1] * ep[j - 1]
            b = lb[j - 1] * em[j - 1]
            la[j] = a * xi + b * si
            lb[j] = a * si + b * xi
        ra[d] = 1.0
        rb[d] = 0.0
        for j in range(d - 1, -1, -1):
            a = ep[j + 1] * ra[j + 1]
            b = em[j + 1] * rb[j + 1]
            ra[j] = xi * a + si * b
            rb[j] = si * a + xi * b
        val[i] = la[0] * ep[0] * ra[0] + lb[0] * em[0] * rb[0]
        for j in range(d + 1):
            g = 1j * la[j] * ep[j] * ra[j] - 1j * lb[j] * em[j] * rb[j]
            grad[i, j] = g.real
    return val, grad


# ---------------------------------------------------------------------------
# Forward Euler for the linearised 1D Vlasov-Poisson system
#   dF/dt = -i (kv F + w E),  dE/dt = -i sum_j w_j F_j,  w_j = mu_j v_j


def euler_numpy(F0, E0, kv, w, dt, nsteps, record_steps):
    F = F0.astype(complex).copy()
    E = complex(E0)
    n_rec = record_steps.shape[0]
    E_out = np.empty(nsteps + 1, dtype=complex)
    F_out = np.empty((n_rec, F.shape[0]), dtype=complex)
    E_out[0] = E
    r = 0
    while r < n_rec and record_steps[r] == 0:
        F_out[r] = F
        r += 1
    mdt = -1j * dt
    for n in range(1, nsteps + 1):
        dF = mdt * (kv * F + w * E)
        E = E + mdt * np.dot(w, F)
        F += dF
        E_out[n] = E
        while r < n_rec and record_steps[r] == n:
            F_out[r] = F
            r += 1
    return E_out, F_out


@njit(cache=True)
def euler_numba(F0, E0, kv, w, dt, nsteps, record_steps):
    m = F0.shape[0]
    F = F0.astype(np.complex128).copy()
    E = complex(E0)
    n_rec = record_steps.shape[0]
    E_out = np.empty(nsteps + 1, dtype=np.complex128)
    F_out = np.empty((n_rec, m), dtype=np.complex128)
    E_out[0] = E
    r = 0
    while r < n_rec and record_steps[r] == 0:
        F_out[r, :] = F
        r += 1
    mdt = -1j * dt
    for n in range(1, nsteps + 1):
        acc = 0.0 + 0.0j
        for j in range(m):
            acc += w[j] * F[j]
        for j in range(m):
            F[j] = F[j] + mdt * (kv[j] * F[j] + w[j] * E)
        E = E + mdt * acc
        E_out[n] = E
        while r < n_rec and record_steps[r] == n:
            F_out[r, :] = F
            r += 1
    return E_out, F_out


if USE_NUMBA:
    clenshaw = clenshaw_numba
    wx_value_grad = wx_value_grad_numba
    euler_loop = euler_numba
else:
    clenshaw = clenshaw_numpy
    wx_value_grad = wx_value_grad_numpy
    euler_loop = euler_numpy
