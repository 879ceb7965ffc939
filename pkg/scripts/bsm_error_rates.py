"""Psi-minus error rates: bound table, then exact rates versus mean photon number."""

import argparse

import numpy as np

from homsim.bsm import (EARLY, LATE, MINUS, PLUS, classical_quantum_bounds, error_rate,
                        psi_minus_probability_attenuated, psi_minus_probability_exact)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--mu", type=float, nargs="*", default=list(np.geomspace(1e-4, 0.3, 8)))
    args = parser.parse_args()

    for name, value in classical_quantum_bounds().items():
        print(f"{name:14s} {value:.4f}")
    print()
    print("      mu   e(early/late)   e(+/-)    e(+/-) weak-pulse form")
    for mu in args.mu:
        e_el = error_rate(psi_minus_probability_exact(EARLY, EARLY, mu=mu),
                          psi_minus_probability_exact(EARLY, LATE, mu=mu))
        e_pm = error_rate(psi_minus_probability_exact(PLUS, PLUS, mu=mu),
                          psi_minus_probability_exact(PLUS, MINUS, mu=mu))
        weak = error_rate(psi_minus_probability_attenuated(PLUS, PLUS, mu),
                          psi_minus_probability_attenuated(PLUS, MINUS, mu))
        print(f"{mu:8.2e}   {e_el:12.3e}   {e_pm:8.5f}   {weak:8.5f}")


if __name__ == "__main__":
    main()
