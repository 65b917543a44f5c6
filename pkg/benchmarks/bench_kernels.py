"""Compare the compiled entropy kernels against the numpy fallback.

Times renyi_grid and shannon_rows on synthetic log-probability batches and
checks that both implementations agree bitwise-tightly.  Run directly:

    python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import math
import time

import numpy as np

from entroread import _kernels_py
from entroread.infotheory import DEFAULT_ALPHA_GRID, SUPPORT_LOGEPS

try:
    from entroread import _kernels
except ImportError:
    _kernels = None

SHAPES = ((2048, 128), (2048, 1024), (256, 16384), (64, 50000))


def random_logprobs(rng, rows, vocab):
    x = rng.gumbel(size=(rows, vocab))
    x -= x.max(axis=1, keepdims=True)
    p = np.exp(x)
    p /= p.sum(axis=1, keepdims=True)
    return np.log(p)


def best_time(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="timing repeats, best is kept")
    args = parser.parse_args()

    if _kernels is None:
        print("compiled extension not built; showing the numpy fallback only")
    rng = np.random.default_rng(0)
    alphas = np.array(DEFAULT_ALPHA_GRID)

    header = f"{'workload':>26} {'numpy':>10} {'compiled':>10} {'speedup':>8} {'max |diff|':>11}"
    print(header)
    print("-" * len(header))
    for rows, vocab in SHAPES:
        lp = random_logprobs(rng, rows, vocab)
        for name, call_py, call_c in (
            (
                f"renyi_grid {rows}x{vocab}x{len(alphas)}",
                lambda: _kernels_py.renyi_grid(lp, alphas, SUPPORT_LOGEPS),
                (lambda: _kernels.renyi_grid(lp, alphas, SUPPORT_LOGEPS)) if _kernels else None,
            ),
            (
                f"shannon_rows {rows}x{vocab}",
                lambda: _kernels_py.shannon_rows(lp),
                (lambda: _kernels.shannon_rows(lp)) if _kernels else None,
            ),
        ):
            t_py = best_time(call_py, args.repeats)
            if call_c is None:
                print(f"{name:>26} {t_py * 1e3:>8.1f}ms {'-':>10} {'-':>8} {'-':>11}")
                continue
            t_c = best_time(call_c, args.repeats)
            diff = float(np.nanmax(np.abs(call_py() - call_c())))
            print(
                f"{name:>26} {t_py * 1e3:>8.1f}ms {t_c * 1e3:>8.1f}ms "
                f"{t_py / t_c:>7.1f}x {diff:>11.2e}"
            )


if __name__ == "__main__":
    main()
