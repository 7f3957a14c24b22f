#!/usr/bin/env python3
"""Convert the M1/M3 competition data shipped in the `fcompdata` wheel to the
`series_id,timestamp,value` CSV layout read by `cftl-bench`.

Usage:
    python scripts/fetch_m_data.py [--wheel PATH] [--out data]

Without --wheel the wheel is fetched with `pip download`. Each output file
holds the training and test values of every series, concatenated, with
integer timestamps starting at 1.
"""

import argparse
import csv
import json
import subprocess
import sys
import tempfile
import zipfile
from collections import defaultdict
from pathlib import Path

WHEEL = "fcompdata==0.1.4"
SOURCES = {"M1": "fcompdata/data/m1_data.json", "M3": "fcompdata/data/m3_data.json"}
PERIODS = {"YEARLY": "Yearly", "QUARTERLY": "Quarterly", "MONTHLY": "Monthly", "OTHER": "Other"}


def first(v):
    return v[0] if isinstance(v, list) else v


def find_wheel(explicit):
    if explicit:
        return Path(explicit)
    tmp = Path(tempfile.mkdtemp())
    subprocess.run(
        [sys.executable, "-m", "pip", "download", WHEEL, "--no-deps", "-d", str(tmp)],
        check=True,
    )
    return next(tmp.glob("fcompdata-*.whl"))


def convert(wheel, out):
    with zipfile.ZipFile(wheel) as z:
        for comp, member in SOURCES.items():
            data = json.loads(z.read(member))
            groups = defaultdict(list)
            for key, entry in data.items():
                period = PERIODS.get(str(first(entry["period"])).upper())
                if period is None:
                    continue
                values = list(entry["x"]) + list(entry["xx"])
                groups[period].append((str(first(entry.get("sn", key))), values))
            target = out / comp.lower()
            target.mkdir(parents=True, exist_ok=True)
            for period, series in sorted(groups.items()):
                path = target / f"{comp}-{period}.csv"
                with path.open("w", newline="") as f:
                    w = csv.writer(f)
                    w.writerow(["series_id", "timestamp", "value"])
                    for sid, values in sorted(series):
                        for t, v in enumerate(values, start=1):
                            w.writerow([sid, t, repr(float(v))])
                print(f"{path}: {len(series)} series")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--wheel", help="path to a downloaded fcompdata wheel")
    ap.add_argument("--out", default="data", help="output root (default: data)")
    args = ap.parse_args()
    convert(find_wheel(args.wheel), Path(args.out))


if __name__ == "__main__":
    main()
