"""Run every acceptance check and print one line per criterion."""

import argparse
import sys

from homsim.acceptance import run_all


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--epsilon", type=float, default=1e-14)
    args = parser.parse_args()
    results = run_all(args.epsilon)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} passed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
