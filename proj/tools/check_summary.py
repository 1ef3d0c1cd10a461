#!/usr/bin/env python3
"""Recompute summary.csv from the traces under an output directory.

Usage: check_summary.py OUT_DIR

Reads the last row of every OUT_DIR/<method>/seed_<s>/trace.csv and checks
that each (method, metric) row of summary.csv matches the mean and n-1
standard deviation to 1e-12 (relative, absolute below 1). Exit status 0 on
agreement, 1 otherwise.
"""

import csv
import math
import statistics
import sys
from collections import defaultdict
from pathlib import Path

TOL = 1e-12


def final_rows(out_dir):
    found = defaultdict(list)
    for trace in sorted(out_dir.glob("*/seed_*/trace.csv")):
        with trace.open(newline="") as f:
            rows = list(csv.DictReader(f))
        if rows:
            found[trace.parent.parent.name].append(rows[-1])
    return found


def close(a, b):
    return abs(a - b) <= TOL * max(1.0, abs(a), abs(b))


def main(argv):
    if len(argv) != 2:
        print(__doc__.strip(), file=sys.stderr)
        return 2
    out_dir = Path(argv[1])
    finals = final_rows(out_dir)
    if not finals:
        print(f"no traces under {out_dir}", file=sys.stderr)
        return 1

    bad = 0
    checked = 0
    with (out_dir / "summary.csv").open(newline="") as f:
        for row in csv.DictReader(f):
            values = [float(r[row["metric"]]) for r in finals[row["method"]]]
            mean = math.fsum(values) / len(values)
            std = statistics.stdev(values) if len(values) > 1 else 0.0
            ok = (int(row["runs"]) == len(values) and close(float(row["mean"]), mean)
                  and close(float(row["std"]), std))
            checked += 1
            if not ok:
                bad += 1
                print(f"mismatch {row['method']}/{row['metric']}: file {row['mean']},{row['std']} "
                      f"recomputed {mean!r},{std!r} over {len(values)} runs")
    print(f"{checked} summary rows checked, {bad} mismatches")
    return 1 if bad or checked == 0 else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
