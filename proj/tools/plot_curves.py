#!/usr/bin/env python3
"""Plot curves.csv from a timeseries or threshold run: nats against budget,
one panel per setting, shaded bootstrap band per method."""
import argparse
import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("curves", help="curves.csv")
    ap.add_argument("-o", "--output", default="curves.png")
    args = ap.parse_args()

    series = defaultdict(lambda: defaultdict(list))
    with open(args.curves, newline="") as f:
        for row in csv.DictReader(f):
            pts = series[row["setting"]][row["method"]]
            pts.append(tuple(float(row[k]) for k in ("budget_used", "nats", "ci_low", "ci_high")))

    fig, axes = plt.subplots(1, len(series), figsize=(4 * len(series), 3.2), squeeze=False)
    for ax, (setting, methods) in zip(axes[0], sorted(series.items())):
        for method, pts in sorted(methods.items()):
            pts.sort()
            x = [p[0] for p in pts]
            ax.plot(x, [p[1] for p in pts], label=method)
            ax.fill_between(x, [p[2] for p in pts], [p[3] for p in pts], alpha=0.25)
        ax.set_yscale("log")
        ax.set_title(setting)
        ax.set_xlabel("responses")
    axes[0][0].set_ylabel("KL (nats)")
    axes[0][-1].legend()
    fig.tight_layout()
    fig.savefig(args.output, dpi=120)


if __name__ == "__main__":
    main()
