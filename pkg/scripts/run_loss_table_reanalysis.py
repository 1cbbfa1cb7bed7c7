#!/usr/bin/env python3
"""Full reanalysis of a loss-table CSV: 2d fit, per-slice exponents, frontier.

Point it at any CSV in the standard loss-table format, e.g. the output of the
trainer package or an externally extracted table:

    python scripts/run_loss_table_reanalysis.py --csv losses.csv --out report/
"""

import argparse
import sys

from walklab import cli


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--csv", required=True)
    parser.add_argument("--out", default="reanalysis_out")
    parser.add_argument("--drop-outliers", type=int, default=5)
    parser.add_argument("--surface", choices=["chinchilla", "kernel", "mlp"],
                        default="mlp")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    return cli.main([
        "report",
        "--csv", args.csv,
        "--out", args.out,
        "--method", args.surface,
        "--drop-outliers", str(args.drop_outliers),
        "--seed", str(args.seed),
    ])


if __name__ == "__main__":
    sys.exit(main())
