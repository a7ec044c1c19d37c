"""Certify Psi_m for a range of m and write one certificate per m.

The m = 50 reproduction is ``--from 50 --to 50``; expect hours and tens of
gigabytes (see ``scaling.py`` for an estimate on the current machine).
"""

import argparse
import json
import logging
from pathlib import Path

from magiccert.certifier import VERDICT_OK, certify


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--from", dest="lo", type=int, default=0)
    parser.add_argument("--to", dest="hi", type=int, default=12)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--max-memory", type=int)
    parser.add_argument("--oracle-up-to", type=int, default=-1, help="exact rank for m up to this")
    parser.add_argument("--out", default="certificates")
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    failures = 0
    for m in range(args.lo, args.hi + 1):
        cert = certify(m, threads=args.threads, max_memory=args.max_memory, oracle=m <= args.oracle_up_to)
        (out / f"cert-m{m:02d}.json").write_text(json.dumps(cert.to_json(), indent=1) + "\n")
        extra = "" if cert.oracle_rank is None else f" exact={cert.oracle_rank}"
        print(f"m={m} columns={cert.columns} bound={cert.rank_lower_bound} nnz={cert.nonzeros} "
              f"{cert.wall_seconds}s peak={cert.peak_memory_bytes >> 20}MiB {cert.verdict}{extra}")
        failures += cert.verdict != VERDICT_OK
    raise SystemExit(1 if failures else 0)


if __name__ == "__main__":
    main()
