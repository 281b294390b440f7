"""Compare the compiled kernels with their pure-Python fallbacks.

Usage: ``python3 benchmarks/bench_kernels.py [--repeat N]``

The fallback is the same function body run by the interpreter (``py_func``),
which is exactly what ``MACDMT_DISABLE_NUMBA=1`` selects.
"""

import argparse
import time

import numpy as np

from macdmt import _kernels
from macdmt._jit import NUMBA_DISABLED
from macdmt.exponent_solver import _mac_problem
from macdmt.curves import MacConfig, mac_dmt
from macdmt.mac_sim import draw_channel, mmse_qr, real_lift


def _sd_inputs(batch, seed=0):
    rng = np.random.default_rng(seed)
    K = n_r = 3
    snr = 10 ** 2.0
    out = []
    for _ in range(batch):
        M = np.sqrt(snr / 6) * real_lift(draw_channel(K, n_r, rng))
        qr = mmse_qr(M, K, n_r, 1, 0.3, snr)
        s = 2 * rng.integers(0, 4, size=6) - 3
        y = M @ s + rng.standard_normal(6) * np.sqrt(0.5)
        out.append((np.ascontiguousarray(qr.R), qr.project(y)))
    return out


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--batch", type=int, default=2000)
    args = ap.parse_args()

    levels = np.full(6, 4, dtype=np.int64)
    inputs = _sd_inputs(args.batch)

    def sd(kernel):
        return lambda: [kernel(R, z, levels, 40.0, -1) for R, z in inputs]

    cfg = MacConfig(3, 3, 0.4)
    weights, _ = _mac_problem(cfg)
    budget = mac_dmt(cfg)

    def grid(kernel):
        return lambda: kernel(np.asarray(weights, float), budget, 0.4, 2e-3, 10 ** 8)

    cases = [
        (f"sphere decoder, {args.batch} 6-D searches", _kernels.sphere_decode_kernel, sd),
        ("grid sup oracle, 3 levels, step 2e-3", _kernels.grid_sup_kernel, grid),
    ]
    print(f"numba {'disabled' if NUMBA_DISABLED else 'enabled'}")
    print(f"{'kernel':42s} {'compiled [s]':>13s} {'python [s]':>11s} {'speedup':>8s}")
    for name, kernel, make in cases:
        compiled = make(kernel)
        compiled()  # trigger compilation outside the timing
        t_c = _time(compiled, args.repeat)
        t_p = _time(make(kernel.py_func), 1)
        print(f"{name:42s} {t_c:13.4f} {t_p:11.4f} {t_p / t_c:8.1f}x")


if __name__ == "__main__":
    main()
