"""Print an aggregate.csv as a fixed-width table, one block per scenario.

    python3 scripts/summarize.py results/demo/aggregate.csv
"""
import sys
from itertools import groupby

from tvsbl.bench import read_csv


def main(path):
    rows = read_csv(path)
    for scenario, group in groupby(rows, key=lambda r: r["scenario"]):
        print(f"\n{scenario}")
        print(f"{'snr_db':>7} {'algorithm':<14} {'nmse_db':>9} {'f1':>7} {'n':>4}")
        for r in group:
            print(f"{float(r['snr_db']):>7.1f} {r['algorithm']:<14} "
                  f"{float(r['nmse_db']):>9.2f} {float(r['f1_mean']):>7.3f} {r['n_trials']:>4}")


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit("usage: summarize.py AGGREGATE_CSV")
    main(sys.argv[1])
