"""Simulated polarization HOM scan with pulse-by-pulse click sampling and a sine fit."""

import argparse
import math

from homsim.acceptance import monte_carlo_polarization


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=10**6)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    records, fit = monte_carlo_polarization(args.trials, args.seed, args.workers)
    print("angle_deg  coincidences  singles_1  singles_2")
    for r in records:
        print(f"{math.degrees(r.setting):9.1f}  {r.coincidences:12d}  {r.singles_1:9d}  {r.singles_2:9d}")
    print(f"V = {fit.visibility:.4f} +/- {fit.visibility_error:.4f}")


if __name__ == "__main__":
    main()
