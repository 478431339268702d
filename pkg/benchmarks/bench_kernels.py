"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--n 500000] [--repeat 5]
"""

import argparse

from graphene.bench import bench_kernels


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    for row in bench_kernels(args.n, args.repeat):
        cy = row.get("cython_s")
        line = f"{row['kernel']:<17} python {row['python_s']:.4f}s"
        if cy is not None:
            line += f"  cython {cy:.4f}s  x{row['speedup']:.1f}"
        print(line)


if __name__ == "__main__":
    main()
