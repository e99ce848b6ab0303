#!/usr/bin/env python3
"""Compare the compiled kernels against the numpy reference implementation.

Usage: python benchmarks/compare_kernels.py [--t-steps N] [--hidden H] [--repeats R]
"""

import argparse
import json

from gestureforge.kernels.benchmark import format_table, kernel_benchmark


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--t-steps", type=int, default=40)
    parser.add_argument("--hidden", type=int, default=64)
    parser.add_argument("--alphabet", type=int, default=12)
    parser.add_argument("--target-len", type=int, default=4)
    parser.add_argument("--repeats", type=int, default=50)
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    args = parser.parse_args()
    rows = kernel_benchmark(t_steps=args.t_steps, hidden=args.hidden,
                            alphabet=args.alphabet, target_len=args.target_len,
                            repeats=args.repeats)
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        print(format_table(rows))


if __name__ == "__main__":
    main()
