"""Compare the compiled core with the numpy fallback.

    python benchmarks/bench_core.py [--sizes 6 12 20] [--repeat 5]

Times one loss+gradient evaluation and a fixed-length descent for every
kernel, checks that both backends agree, and prints a table.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from symbreak import _fallback, backend
from symbreak.kernels import CUBIC_GAUSSIAN, RELU, poly
from symbreak.optimize import xavier_init

KINDS = [poly(3), poly(5), CUBIC_GAUSSIAN, RELU]


def bench(fn, repeat: int) -> float:
    number = 1
    while timeit.timeit(fn, number=number) < 0.05 and number < 10**6:
        number *= 4
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sizes", type=int, nargs="+", default=[6, 12, 20])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--steps", type=int, default=200)
    args = ap.parse_args()
    try:
        core = backend.get("compiled")
    except ImportError:
        print("compiled core is not available; build with `pip install -e . --no-build-isolation`")
        return
    print(f"{'kernel':<15}{'d':>4}{'op':>8}{'compiled':>14}{'python':>14}{'speedup':>10}")
    for kind in KINDS:
        for d in args.sizes:
            W = xavier_init(d, d, 0)
            V = np.eye(d)
            lg_c = core.loss_grad(kind.code, kind.r, W, V, 0.5)
            lg_p = _fallback.loss_grad(kind.code, kind.r, W, V, 0.5)
            assert np.allclose(lg_c[1], lg_p[1], rtol=1e-10, atol=1e-12), "backends disagree"
            rows = [
                ("grad", lambda m=core: m.loss_grad(kind.code, kind.r, W, V, 0.5),
                 lambda: _fallback.loss_grad(kind.code, kind.r, W, V, 0.5)),
            ]
            gd = (kind.code, kind.r, W, V, 0.5, True, 0.5, 0.5, 1e-4, args.steps, 1e-300, False)
            rows.append(("gd", lambda: core.gd_loop(*gd), lambda: _fallback.gd_loop(*gd)))
            for op, fc, fp in rows:
                tc, tp = bench(fc, args.repeat), bench(fp, args.repeat)
                print(f"{kind.id:<15}{d:>4}{op:>8}{tc * 1e6:>12.1f}us{tp * 1e6:>12.1f}us{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
