"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat 5]

Times the raw power-swap kernel on a large random batch and two end-to-end
workloads that are dominated by gatewise evolution.
"""

import argparse
import timeit

import numpy as np

from qbilliard import _backend, deutsch, pctc
from qbilliard.clock import ClockSpec
from qbilliard.gates import CircuitSpec
from qbilliard.states import evolved_input


def raw_power_swap():
    rng = np.random.default_rng(0)
    d, n = 5, 8
    keys = rng.integers(0, d**n, size=1_000_000).astype(np.int64)
    amps = rng.normal(size=keys.size) + 0j

    def run():
        _backend.kernels().apply_power_swap(keys, amps, d**5, d**1, d, 0.6 + 0.2j, 0.4 - 0.2j)

    return run


def reduced_action_m4():
    spec = CircuitSpec(4, ClockSpec(5), swap_power=0.37)
    psi = evolved_input(spec.clock, 4)
    return lambda: pctc.reduced_action(spec, psi)


def deutsch_isometry_m3():
    spec = CircuitSpec(3, ClockSpec(3), swap_power=0.37)
    sigma = evolved_input(spec.clock, 3)
    return lambda: deutsch.DeutschChannel(spec, sigma)


WORKLOADS = {
    "power_swap kernel, 1e6 entries": raw_power_swap,
    "reduced action, M=4 N=5 p=0.37": reduced_action_m4,
    "Deutsch isometry, M=3 N=3 p=0.37": deutsch_isometry_m3,
}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    names = _backend.available()
    print(f"{'workload':36s}" + "".join(f"{n:>12s}" for n in names) + "     speedup")
    for label, factory in WORKLOADS.items():
        fn = factory()
        times = {}
        for name in names:
            with _backend.use_backend(name):
                fn()
                times[name] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
        row = f"{label:36s}" + "".join(f"{times[n] * 1e3:10.1f}ms" for n in names)
        if "compiled" in times:
            row += f"  {times['python'] / times['compiled']:8.2f}x"
        print(row)


if __name__ == "__main__":
    main()
