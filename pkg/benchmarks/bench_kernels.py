"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel: best wall time for each path, the speedup, and
the max abs difference between the two outputs. Numba compile time is paid
in a warm-up call and excluded.
"""

import argparse
import time

import numpy as np

from qsvt_hs import _kernels as K
from qsvt_hs import vlasov as vl


def best_of(fn, repeat):
    fn()  # warm-up / JIT
    ts = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        ts.append(time.perf_counter() - t0)
    return min(ts), out


def cases(rng):
    coeffs = rng.normal(size=801)
    xs = np.linspace(-1, 1, 20001)
    yield "clenshaw deg 800 x 20001", (lambda: K.clenshaw_numpy(coeffs, xs)), (lambda: K.clenshaw_numba(coeffs, xs))

    phases = rng.uniform(-np.pi, np.pi, 202)
    nodes = np.cos((2 * np.arange(1, 102) - 1) * np.pi / 404)
    yield ("wx value+grad deg 201 x 101",
           lambda: K.wx_value_grad_numpy(phases, nodes), lambda: K.wx_value_grad_numba(phases, nodes))

    g = vl.build_grid(1, 32, 4.5)
    st, _ = vl.initial_state(g, 0.4)
    v = g.points[:, 0]
    kv, w = 0.4 * v, vl.mu(g) * v
    F0 = st.F.astype(complex)
    E0 = complex(st.E[0])
    n = 250_000
    rec = np.arange(0, n + 1, 100, dtype=np.int64)
    yield ("euler 32 pts x 250k steps",
           lambda: K.euler_numpy(F0, E0, kv, w, 1e-4, n, rec), lambda: K.euler_numba(F0, E0, kv, w, 1e-4, n, rec))


def maxdiff(a, b):
    if isinstance(a, tuple):
        return max(maxdiff(x, y) for x, y in zip(a, b))
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not K.HAVE_NUMBA:
        print("numba not importable; nothing to compare")
        return
    rng = np.random.default_rng(1)
    print(f"{'kernel':32s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s} {'max diff':>9s}")
    for name, f_np, f_nb in cases(rng):
        t_np, o_np = best_of(f_np, args.repeat)
        t_nb, o_nb = best_of(f_nb, args.repeat)
        print(f"{name:32s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f} {maxdiff(o_np, o_nb):9.1e}")


if __name__ == "__main__":
    main()
