"""Throughput comparison of the compiled kernels against the numpy fallback.

Times the four kernel operations on training-shaped workloads and prints
points-per-second for each available backend plus the speedup.  Run:

    python3 benchmarks/benchmark_backends.py [--batch 256] [--repeats 200]
"""

import argparse
import time

import numpy as np

from sobnn import get_activation
from sobnn._kernels import available_backends, backend_module


def _layers(rng, dims, spread=0.9):
    return [(rng.uniform(-spread, spread, (dout, din)), rng.uniform(-spread, spread, dout))
            for din, dout in zip(dims[:-1], dims[1:])]


def _time(fn, repeats):
    fn()  # warm up caches and any lazy setup
    best = float("inf")
    for _ in range(max(1, repeats // 20)):
        t0 = time.perf_counter()
        for _ in range(20):
            fn()
        best = min(best, (time.perf_counter() - t0) / 20)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--batch", type=int, default=256)
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    act = get_activation("sigmoid")
    cases = []

    layers1 = _layers(rng, (1, 10, 1))
    X1 = rng.uniform(-5.0, 5.0, (1, args.batch))
    v1 = np.ones(1)
    cot2 = rng.normal(size=(3, args.batch))
    cases.append(("jet_forward k=2 (1,10,1)",
                  lambda mod: mod.jet_forward(layers1, act.plan, X1, v1, 2)))
    cases.append(("jet_vjp     k=2 (1,10,1)",
                  lambda mod: mod.jet_vjp(layers1, act.plan, X1, v1, 2, cot2)))

    layers2 = _layers(rng, (2, 10, 1))
    X2 = rng.uniform(-5.0, 5.0, (2, args.batch))
    cot4 = rng.normal(size=(4, args.batch))
    cases.append(("cross_forward  (2,10,1)",
                  lambda mod: mod.cross_forward(layers2, act.plan, X2, 0, 1)))
    cases.append(("cross_vjp      (2,10,1)",
                  lambda mod: mod.cross_vjp(layers2, act.plan, X2, 0, 1, cot4)))

    layers3 = _layers(rng, (1, 64, 64, 1))
    X3 = rng.uniform(-5.0, 5.0, (1, args.batch))
    cases.append(("jet_forward k=4 (1,64,64,1)",
                  lambda mod: mod.jet_forward(layers3, act.plan, X3, v1, 4)))

    backends = available_backends()
    print(f"batch={args.batch}  backends={', '.join(backends)}")
    header = f"{'operation':<28}" + "".join(f"{name + ' pts/s':>16}" for name in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, call in cases:
        rates = []
        for name in backends:
            mod = backend_module(name)
            seconds = _time(lambda: call(mod), args.repeats)
            rates.append(args.batch / seconds)
        row = f"{label:<28}" + "".join(f"{rate:>16.4g}" for rate in rates)
        if len(rates) == 2:
            row += f"{rates[0] / rates[1]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
