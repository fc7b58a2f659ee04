"""Compare the compiled double-precision core against the pure-Python fallback.

Both backends are imported side by side and fed identical inputs, so the
timings isolate the row engine itself.  Run with ``python3 benchmarks/bench_core.py``.
"""

from __future__ import annotations

import argparse
import statistics
import time

from qtchain import _core_py
from qtchain.kernels import gaps
from qtchain.lattice import Configuration, Params
from qtchain.shapes import DoubleSignature

try:
    from qtchain import _core
except ImportError:
    _core = None

CASES = [
    ("one-sided N=3", "0.5", "0.3", (2, 1, 0), ()),
    ("two-sided N=4", "0.5", "0.3", (1, 0), (2, 1)),
    ("two-sided N=6 q=0.8", "0.8", "0.4", (3, 1, 0), (2, 1, 0)),
    ("near q=1, N=2", "0.95", "0.5", (0,), (0,)),
]


def row_inputs(q, t, plus, minus):
    X = Configuration(Params.make(q, t), DoubleSignature(plus, minus))
    qf, tf = X.params.qp.floats()
    N = X.level
    ct = _core_py.poch_inf(tf, qf) ** N / (_core_py.poch_inf(tf**N, qf) * _core_py.poch_inf(qf, qf) ** (N - 1))
    return X.float_values(), X.k, gaps(X), qf, tf, ct


def best_of(fn, args, budget, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args, budget)
        times.append(time.perf_counter() - start)
    return min(times), statistics.median(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--eps", type=float, default=1e-14)
    args = ap.parse_args(argv)

    print(f"{'case':<24}{'entries':>9}{'python (s)':>13}{'compiled (s)':>15}{'speedup':>10}{'max diff':>11}")
    for label, q, t, plus, minus in CASES:
        inputs = row_inputs(q, t, plus, minus)
        py_best, _ = best_of(_core_py.row_float, inputs, args.eps, args.repeat)
        py_entries, _ = _core_py.row_float(*inputs, args.eps)
        if _core is None:
            print(f"{label:<24}{len(py_entries):>9}{py_best:>13.4f}{'n/a':>15}{'n/a':>10}{'n/a':>11}")
            continue
        c_best, _ = best_of(_core.row_float, inputs, args.eps, args.repeat)
        c_entries, _ = _core.row_float(*inputs, args.eps)
        diff = max(abs(a[-1] - b[-1]) for a, b in zip(py_entries, c_entries))
        print(f"{label:<24}{len(py_entries):>9}{py_best:>13.4f}{c_best:>15.4f}{py_best / c_best:>9.1f}x{diff:>11.1e}")
    if _core is None:
        print("compiled core not built; run `python3 setup.py build_ext --inplace`")


if __name__ == "__main__":
    main()
