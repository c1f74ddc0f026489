"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--size N] [--repeat R]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from tchar import _fallback

try:
    from tchar import _core
except ImportError:  # extension not built
    _core = None


def cases(size: int, rng: np.random.Generator):
    p = np.exp(rng.uniform(np.log(1e-200), np.log(0.5), size))
    z = -np.exp(rng.uniform(-5.0, 50.0, size))
    x = rng.uniform(0.0, 1.0, size)
    q = rng.standard_cauchy(size) * 5.0
    return {
        "betainc(2.5, 0.5)": lambda m: m.betainc(2.5, 0.5, x, 1.0 - x),
        "t_lower_tail(nu=3)": lambda m: m.t_lower_tail(3.0, z),
        "t_lower_quantile(nu=3)": lambda m: m.t_lower_quantile(3.0, p),
        "t_lower_quantile(nu=7.5)": lambda m: m.t_lower_quantile(7.5, p),
        "qfam_cdf(0.3, 1, 0)": lambda m: m.qfam_cdf(0.3, 1.0, 0.0, q),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(2024)
    print(f"{'kernel':<26}{'fallback [s]':>14}{'compiled [s]':>14}{'speedup':>10}{'max rel diff':>14}")
    for name, call in cases(args.size, rng).items():
        t_py = min(timeit.repeat(lambda: call(_fallback), number=1, repeat=args.repeat))
        if _core is None:
            print(f"{name:<26}{t_py:>14.4f}{'n/a':>14}")
            continue
        t_c = min(timeit.repeat(lambda: call(_core), number=1, repeat=args.repeat))
        a = np.asarray(call(_fallback)).ravel()
        b = np.asarray(call(_core)).ravel()
        diff = np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))
        print(f"{name:<26}{t_py:>14.4f}{t_c:>14.4f}{t_py / t_c:>9.1f}x{diff:>14.2e}")


if __name__ == "__main__":
    main()
