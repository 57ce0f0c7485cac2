"""Compare the compiled and pure-Python kernels on a grid of problem sizes.

Run with ``python benchmarks/bench_backends.py``. Prints a CSV table with
median ``learn`` wall-clock seconds per backend and the speedup.
"""
import argparse
import csv
import sys

from colliderdag._backend import BACKENDS
from colliderdag.cli import bench_table


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--m", default="500,3000")
    parser.add_argument("--n", default="10,20,35")
    parser.add_argument("--repetitions", type=int, default=5)
    args = parser.parse_args(argv)
    ms = [int(x) for x in args.m.split(",")]
    ns = [int(x) for x in args.n.split(",")]

    backends = [b for b in ("compiled", "python") if b in BACKENDS]
    tables = {b: bench_table(ms, ns, repetitions=args.repetitions, backend=b) for b in backends}

    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["n", "m", *(f"{b}_s" for b in backends), "speedup"])
    for n in ns:
        for m in ms:
            times = [tables[b][n, m] for b in backends]
            speedup = times[-1] / times[0] if len(times) == 2 else float("nan")
            out.writerow([n, m, *(f"{t:.6f}" for t in times), f"{speedup:.1f}"])


if __name__ == "__main__":
    main()
