"""Recompute percent-difference columns from mean-test AUC pairs and print the DFNN pool size.

Reads a CSV with columns label,reference,value (reference is the all-feature or
average AUC); without an argument it prints a few worked rows.

    python3 scripts/percent_tables.py rows.csv
"""
import csv
import sys

from rgsearch.metrics import percent_difference
from rgsearch.space import builtin_space, dfnn_cardinality_report

EXAMPLE_ROWS = [("15year all vs subset", 0.818, 0.862), ("5year all vs subset", 0.766, 0.750),
                ("5year average vs best", 0.542, 0.766)]


def main(argv):
    if argv:
        with open(argv[0], newline="") as fh:
            rows = [(r["label"], float(r["reference"]), float(r["value"])) for r in csv.DictReader(fh)]
    else:
        rows = EXAMPLE_ROWS
    print(f"{'row':<26}{'reference':>10}{'value':>8}{'% diff':>9}")
    for label, ref, val in rows:
        print(f"{label:<26}{ref:>10.3f}{val:>8.3f}{percent_difference(ref, val):>9.2f}")

    rep = dfnn_cardinality_report(builtin_space("DFNN", 4189))
    print("\nDFNN pool at 4189 cases")
    print("  axis counts:", ", ".join(f"{k}={v}" for k, v in rep["counts"].items()))
    print(f"  factors: {rep['factors']}")
    print(f"  cardinality: {rep['cardinality']} ({rep['cardinality']:.3e})")
    print(f"  quoted factors: {rep['quoted_factors']} (product {rep['quoted_product']:.3e})")


if __name__ == "__main__":
    main(sys.argv[1:])
