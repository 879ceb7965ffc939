"""Visibility with no, one and two memories in the paths, at equal photon numbers at the splitter."""

import argparse
from pathlib import Path

from homsim.acceptance import storage_configs
from homsim.runner import run_sweep, write_outputs


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, help="also write CSV/JSON for each configuration")
    args = parser.parse_args()
    for name, cfg in storage_configs().items():
        out = run_sweep(cfg)
        mu_a, mu_b = out.summary["mu_at_bs"]
        print(f"{name:15s} V = {out.summary['visibility']:.5f}  mu at splitter {mu_a:.4g} / {mu_b:.4g}")
        if args.out:
            write_outputs(out, args.out, name)


if __name__ == "__main__":
    main()
