#!/usr/bin/env python3
"""Time the compiled kernels against the pure-Python fallback.

Runs the two hot paths — power expansion and first-fit grouping — on a
square-lattice Hamiltonian under each available backend, checks that the
outputs are bit-identical, and prints a timing table.

    python3 benchmarks/bench_kernels.py --rows 3 --cols 3 --nmax 4
"""

import argparse
import time

import numpy as np

from qcmoments import kernels
from qcmoments.models import CouplingSet, build_hamiltonian, build_lattice
from qcmoments.pauli import hamiltonian_powers


def run_backend(name, h, nmax, repeats):
    with kernels.use_backend(name):
        best_expand = min(
            timed(lambda: hamiltonian_powers(h, nmax)) for _ in range(repeats)
        )
        powers = hamiltonian_powers(h, nmax)
        xs, zs, _ = powers[nmax].masks()
        best_group = min(
            timed(lambda: kernels.group_first_fit(xs, zs, h.q))
            for _ in range(repeats)
        )
        assign, label_x, label_z = kernels.group_first_fit(xs, zs, h.q)
    return powers, (assign, label_x, label_z), best_expand, best_group


def timed(fn):
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--rows", type=int, default=3)
    parser.add_argument("--cols", type=int, default=3)
    parser.add_argument("--nmax", type=int, default=4)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    graph = build_lattice("square", (args.rows, args.cols))
    h = build_hamiltonian(graph, CouplingSet.uniform(graph))
    backends = kernels.available_backends()
    print(f"lattice {args.rows}x{args.cols} (q={graph.q}), powers to n={args.nmax}")
    print(f"backends: {', '.join(backends)}\n")

    results = {}
    for name in backends:
        results[name] = run_backend(name, h, args.nmax, args.repeats)
        powers = results[name][0]
        raw = len(powers[args.nmax])

    reference = backends[0]
    for name in backends[1:]:
        for n in range(args.nmax + 1):
            if results[name][0][n] != results[reference][0][n]:
                raise SystemExit(f"power n={n} differs between backends")
        for got, want in zip(results[name][1], results[reference][1]):
            if not np.array_equal(got, want):
                raise SystemExit("grouping differs between backends")

    print(f"{'backend':<10} {'expand (s)':>12} {'group (s)':>12}")
    for name in backends:
        _, _, t_expand, t_group = results[name]
        print(f"{name:<10} {t_expand:>12.4f} {t_group:>12.4f}")
    if len(backends) == 2:
        speed_e = results["python"][2] / results["cython"][2]
        speed_g = results["python"][3] / results["cython"][3]
        print(
            f"\ncython speedup: {speed_e:.1f}x expansion, {speed_g:.1f}x "
            f"grouping ({raw} strings at n={args.nmax})"
        )
    print("outputs identical across backends")


if __name__ == "__main__":
    main()
