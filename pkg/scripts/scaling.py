"""Measure size and cost of Psi_m for the 4x4 model and extrapolate.

Prints one CSV row per m (columns, rows touched, nonzeros, build and
elimination seconds), then log-log fits of time and nonzeros against m.
"""

import argparse
import csv
import sys
import time
from math import comb

import numpy as np

from magiccert.certifier import build_psi, default_automaton, eliminate
from magiccert.projalg import build_M


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--m", type=int, nargs="+", default=[4, 6, 8, 10, 12, 14])
    parser.add_argument("--target", type=int, default=50, help="extrapolate to this m")
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()

    model, dfa = build_M(), default_automaton(4)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["m", "columns", "rows", "nonzeros", "nnz_bound", "build_s", "eliminate_s", "rank"])
    ms, secs, nnz = [], [], []
    for m in args.m:
        t0 = time.perf_counter()
        mat = build_psi(model, dfa, m, threads=args.threads)
        t1 = time.perf_counter()
        rank = eliminate(mat)
        t2 = time.perf_counter()
        writer.writerow([m, mat.n_cols, mat.n_rows_touched, mat.nonzeros,
                         (2 * m + 1) ** 3 * comb(2 * m + 3, 3), f"{t1 - t0:.3f}", f"{t2 - t1:.3f}", rank])
        sys.stdout.flush()
        ms.append(m)
        secs.append(t2 - t0)
        nnz.append(mat.nonzeros)
    if len(ms) >= 2:
        lm = np.log(ms)
        ts, tc = np.polyfit(lm, np.log(secs), 1)
        ns, nc = np.polyfit(lm, np.log(nnz), 1)
        t = args.target
        print(f"# time ~ m^{ts:.2f}; nonzeros ~ m^{ns:.2f}", file=sys.stderr)
        print(f"# extrapolated to m={t}: {np.exp(tc) * t ** ts / 3600:.1f} h, "
              f"{np.exp(nc) * t ** ns:.3g} nonzeros (~{8 * np.exp(nc) * t ** ns / 2 ** 30:.0f} GiB of int64 keys)",
              file=sys.stderr)


if __name__ == "__main__":
    main()
