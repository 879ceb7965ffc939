"""HOM visibility of a recalled pulse against a direct one as the comb bandwidth shrinks.

Photon numbers are re-balanced at every bandwidth, so only the spectral
mismatch between the filtered and the unfiltered pulse lowers the visibility.
"""

import argparse

from homsim.acceptance import afc_reference_scan
from homsim.synth import fit_arrays


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--csv", help="write bandwidth,visibility rows to this file")
    args = parser.parse_args()

    scan = afc_reference_scan()
    b_mhz = scan.bandwidths / 1e6
    fit = fit_arrays(b_mhz, scan.visibilities, "gaussian", fixed={"center": 0.0})
    for b, v in zip(b_mhz, scan.visibilities):
        print(f"{b:8.1f} MHz  V = {v:.5f}")
    print(f"Gaussian fit: FWHM = {fit['fwhm']:.1f} +/- {fit.errors['fwhm']:.1f} MHz, "
          f"plateau V = {fit['baseline']:.4f}")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("bandwidth_mhz,visibility\n")
            for b, v in zip(b_mhz, scan.visibilities):
                fh.write(f"{b!r},{float(v)!r}\n")


if __name__ == "__main__":
    main()
