"""Divisibility-threshold search and dynamics scans for the kappa model.

Writes thresholds.json plus one dynamics CSV per requested kappa into the
output directory.
"""

import argparse
import pathlib

import numpy as np

from sigpow.phasecov import (
    divisibility_thresholds,
    kappa_model,
    scan_dynamics,
    write_scan_csv,
    write_threshold_json,
)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--tmax", type=float, default=20.0)
    parser.add_argument("--kappa-max", type=float, default=2.0)
    parser.add_argument(
        "--scan-kappas", type=float, nargs="*", default=[0.3, 0.5, 1.0, 1.5, 2.0]
    )
    args = parser.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    report = divisibility_thresholds(
        kappa_range=(0.0, args.kappa_max), t_max=args.tmax
    )
    write_threshold_json(report, out / "thresholds.json")
    print(
        f"thresholds: cp={report.cp:.6f} sp={report.sp:.6f} "
        f"p_div={report.p_div:.6f} td={report.td:.6f}"
    )

    grid = np.linspace(0.0, args.tmax, 2001)
    for kappa in args.scan_kappas:
        scan = scan_dynamics(kappa_model(kappa), grid)
        path = out / f"kappa_scan_{kappa:g}.csv"
        write_scan_csv(scan, path)
        print(f"kappa={kappa:g}: min backflow lhs {scan.backflow_lhs.min():+.6f} -> {path}")


if __name__ == "__main__":
    main()
