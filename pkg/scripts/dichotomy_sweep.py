"""Mass-ratio sweep on the shipped dichotomy config, printing the verdict table.

    python3 scripts/dichotomy_sweep.py --out runs/dichotomy [--ratios 0.5,0.8,1.5,2.0]
"""
import argparse
import csv
import json
from pathlib import Path

from relhartree.cli import main as relh

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(ROOT / "configs" / "dichotomy.ini"))
    ap.add_argument("--out", default="runs/dichotomy")
    ap.add_argument("--ratios", default=None)
    args = ap.parse_args()

    argv = ["sweep", "--config", args.config, "--out", args.out]
    if args.ratios is not None:
        argv += ["--ratios", args.ratios]
    code = relh(argv)
    out = Path(args.out)
    with (out / "sweep.csv").open() as fh:
        for row in csv.DictReader(fh):
            print(f"{float(row['mass_ratio']):5.2f}  {row['verdict']:16s}  t_end={float(row['t_end']):7.3f}")
    report = json.loads((out / "sweep.json").read_text())
    for job in report["jobs"]:
        print(f"ratio {job['ratio']:g}: E0={job.get('energy0', float('nan')):+.4f} "
              f"a-priori margin={job.get('apriori_min_margin', float('nan')):.4f}")
    raise SystemExit(code)


if __name__ == "__main__":
    main()
