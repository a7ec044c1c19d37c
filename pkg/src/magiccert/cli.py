"""Command-line pipeline: ideal -> Gröbner basis -> automaton -> model -> certificate.

Results go to standard output or files; progress goes to standard error as
``stage=<name> status=<start|done|...>`` lines.  Gröbner bases and automata
are cached as JSON in the output directory, keyed by a hash of the settings
that determine them.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional

from . import FORMAT_VERSION, __version__
from .automaton import (
    Dfa,
    FiniteLanguage,
    count_by_length,
    cycle_structure,
    export_dot,
    growth_rate,
    quotient_automaton,
)
from .certifier import MissingModel, VERDICT_OK, certify, crossing_table
from .freealg import MonomialOrder, magic_ideal_generators
from .ncgroebner import BudgetError, CapExceeded, GroebnerBasis, complete
from .projalg import MagicModel, assignments, build_M, character_matrix, cycle_notation, matrix_to_permutation

log = logging.getLogger("magiccert")

OUT_ENV = "MAGICCERT_OUT"
DEFAULT_OUT = "magiccert-out"

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_INCONCLUSIVE = 3
EXIT_BUDGET = 4
EXIT_CAP = 5
EXIT_MISSING = 6

# state counts of the minimized automata reported for the default order
REFERENCE_STATES = {4: 17, 5: 26, 6: 37}


class MissingArtifact(FileNotFoundError):
    pass


@dataclass
class PipelineConfig:
    n: int = 4
    order: Optional[List[List[int]]] = None
    degree_cap: int = 12
    count: Optional[int] = None
    growth: bool = False
    dot: Optional[str] = None
    m: int = 0
    max_memory: Optional[int] = None
    threads: int = 1
    out_dir: str = DEFAULT_OUT
    no_build: bool = False

    def validate(self) -> None:
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.degree_cap < 2:
            raise ValueError("degree cap must be at least 2 (the generators are quadratic)")
        if self.m < 0:
            raise ValueError("m must be nonnegative")
        if self.count is not None and self.count < 0:
            raise ValueError("--count must be nonnegative")
        if self.threads < 1:
            raise ValueError("threads must be positive")
        if self.max_memory is not None and self.max_memory <= 0:
            raise ValueError("memory budget must be positive")
        self.monomial_order()

    def monomial_order(self) -> MonomialOrder:
        if self.order is None:
            return MonomialOrder(self.n)
        if len(self.order) != self.n * self.n:
            raise ValueError(f"order must list all {self.n * self.n} variables")
        return MonomialOrder.from_variables(self.order, self.n)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "PipelineConfig":
        return cls(**data)

    def stage_key(self, stage: str) -> str:
        """Hash of the settings an artifact depends on."""
        basis = {"n": self.n, "order": self.monomial_order().variables(), "degree_cap": self.degree_cap,
                 "format": FORMAT_VERSION}
        blob = json.dumps({"stage": stage, **basis}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class RunReport:
    command: str
    timings: Dict[str, float] = field(default_factory=dict)
    artifacts: Dict[str, str] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def add_file(self, path: Path) -> None:
        self.artifacts[str(path)] = file_sha256(path)

    def warn(self, message: str) -> None:
        log.warning("stage=%s warning=%s", self.command, message)
        self.warnings.append(message)

    def to_json(self) -> dict:
        return asdict(self)


def file_sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_json(path: Path, data) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")
    return path


class Pipeline:
    def __init__(self, config: PipelineConfig, report: RunReport):
        config.validate()
        self.config = config
        self.report = report
        self.out = Path(config.out_dir)
        self._gb: Optional[GroebnerBasis] = None
        self._dfa: Optional[Dfa] = None

    def _stage(self, name: str, fn: Callable):
        log.info("stage=%s status=start n=%d", name, self.config.n)
        t0 = time.perf_counter()
        result = fn()
        dt = time.perf_counter() - t0
        self.report.timings[name] = round(dt, 3)
        log.info("stage=%s status=done seconds=%.3f", name, dt)
        return result

    def artifact_path(self, stage: str) -> Path:
        return self.out / "cache" / f"{stage}-n{self.config.n}-{self.config.stage_key(stage)}.json"

    def groebner(self) -> GroebnerBasis:
        if self._gb is None:
            path = self.artifact_path("gb")
            if path.exists():
                log.info("stage=gb status=cached path=%s", path)
                self._gb = GroebnerBasis.from_json(json.loads(path.read_text()))
            else:
                if self.config.no_build:
                    raise MissingArtifact(f"no Gröbner basis at {path}; run `magiccert gb --n {self.config.n}` first")
                cfg = self.config
                self._gb = self._stage("gb", lambda: complete(
                    magic_ideal_generators(cfg.n), cfg.monomial_order(), degree_cap=cfg.degree_cap))
                write_json(path, self._gb.to_json())
            self.report.add_file(path)
        return self._gb

    def automaton(self) -> Dfa:
        if self._dfa is None:
            path = self.artifact_path("automaton")
            if path.exists():
                log.info("stage=automaton status=cached path=%s", path)
                self._dfa = Dfa.from_json(json.loads(path.read_text()), self.config.n)
            else:
                if self.config.no_build and not self.artifact_path("gb").exists():
                    raise MissingArtifact(
                        f"no automaton at {path}; run `magiccert automaton --n {self.config.n}` first")
                gb = self.groebner()
                self._dfa = self._stage("automaton", lambda: quotient_automaton(gb))
                write_json(path, self._dfa.to_json())
            self.report.add_file(path)
            expected = REFERENCE_STATES.get(self.config.n)
            if expected is not None and self._dfa.num_states != expected:
                self.report.warn(
                    f"minimized automaton has {self._dfa.num_states} states, reference count is {expected}"
                    + ("" if self.config.order is None else " (non-default monomial order)"))
        return self._dfa


# -- subcommands -------------------------------------------------------------------

def cmd_gb(pipe: Pipeline, args) -> int:
    gb = pipe.groebner()
    by_degree: Dict[int, int] = {}
    for lead in gb.leads:
        by_degree[len(lead)] = by_degree.get(len(lead), 0) + 1
    out = {**gb.summary(), "n": gb.n, "leads_by_degree": {str(k): v for k, v in sorted(by_degree.items())},
           "path": str(pipe.artifact_path("gb"))}
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


def cmd_automaton(pipe: Pipeline, args) -> int:
    dfa = pipe.automaton()
    out = dfa.to_json()
    cfg = pipe.config
    if cfg.count is not None:
        counts = count_by_length(dfa, cfg.count)
        out["counts"] = {"m": cfg.count, "per_length": [str(c) for c in counts.counts],
                         "cumulative": str(counts.total)}
        log.info("stage=count cumulative=%d m=%d", counts.total, cfg.count)
    if cfg.growth:
        out["growth"] = _growth_json(dfa)
    if cfg.dot:
        path = Path(cfg.dot)
        path.write_text(export_dot(dfa))
        pipe.report.add_file(path)
    print(json.dumps(out))
    return EXIT_OK


def _growth_json(dfa: Dfa) -> dict:
    try:
        rate = growth_rate(dfa)
    except FiniteLanguage:
        return {"rate": None, "kind": "finite"}
    kind = "polynomial" if rate == 1.0 else "exponential"
    return {"rate": rate, "kind": kind, "cycles": cycle_structure(dfa)}


def cmd_growth(pipe: Pipeline, args) -> int:
    dfa = pipe.automaton()
    t0 = time.perf_counter()
    out = {"n": pipe.config.n, "states": dfa.num_states, **_growth_json(dfa)}
    out["seconds"] = round(time.perf_counter() - t0, 4)
    print(json.dumps(out))
    return EXIT_OK


def characters_csv(model: MagicModel, every: bool = False) -> List[List[str]]:
    """Rows ``[permutation, p1, q1, p2, q2, ...]``.

    One row per permutation by default, witnessed by the first assignment
    (in binary order) that sends the first leg's p to 0; ``every`` lists
    all assignments instead.
    """
    header = ["permutation"] + [f"{c}{i + 1}" for i in range(model.k) for c in "pq"]
    rows, seen = [header], set()
    for a in assignments(model.k):
        if not every and a[0][0] != 0:
            continue
        sigma = matrix_to_permutation(character_matrix(model, a))
        if not every and sigma in seen:
            continue
        seen.add(sigma)
        rows.append([cycle_notation(sigma)] + [str(b) for pair in a for b in pair])
    return rows


def cmd_characters(pipe: Pipeline, args) -> int:
    model = load_model(args.model) if args.model else build_M()
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerows(characters_csv(model, args.all))
    return EXIT_OK


def load_model(path: str) -> MagicModel:
    p = Path(path)
    if not p.exists():
        raise MissingArtifact(f"model file {p} not found")
    return MagicModel.from_json(json.loads(p.read_text()))


def cmd_certify(pipe: Pipeline, args) -> int:
    cfg = pipe.config
    model = load_model(args.model) if args.model else None
    if model is None and cfg.n != 4:
        raise MissingModel(f"no built-in model for n = {cfg.n}; pass --model FILE")
    dfa = pipe.automaton()
    cert = pipe._stage("certify", lambda: certify(
        cfg.m, cfg.n, model=model, dfa=dfa, threads=cfg.threads,
        max_memory=cfg.max_memory, oracle=args.oracle))
    data = cert.to_json()
    if args.out:
        path = write_json(Path(args.out), data)
        pipe.report.add_file(path)
    print(json.dumps(data))
    log.info("stage=certify verdict=%s columns=%d bound=%d peak_bytes=%d rows=%d",
             cert.verdict, cert.columns, cert.rank_lower_bound, cert.peak_memory_bytes, cert.rows_touched)
    if args.oracle:
        log.info("stage=oracle rank=%d", cert.oracle_rank)
        if cert.oracle_rank < cert.rank_lower_bound:
            pipe.report.warn("exact rank below the structural bound")
            return EXIT_FAILED_CHECK
    return EXIT_OK if cert.verdict == VERDICT_OK else EXIT_INCONCLUSIVE


def cmd_dims(pipe: Pipeline, args) -> int:
    dfa = pipe.automaton()
    rows = crossing_table(pipe.config.n, args.k, args.l, args.cap, dfa)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["m", "normal_words", "bound", "crossed"])
    for m, words, bound in rows:
        writer.writerow([m, words, bound, int(words > bound)])
    if rows[-1][1] <= rows[-1][2]:
        log.info("stage=dims crossing=none cap=%d", args.cap)
    else:
        log.info("stage=dims crossing=%d", rows[-1][0])
    return EXIT_OK


def cmd_check(pipe: Pipeline, args) -> int:
    from .checks import run_checks

    results = pipe._stage("check", lambda: run_checks(pipe, full=args.full))
    failed = 0
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failed += not ok
    return EXIT_OK if not failed else EXIT_FAILED_CHECK


# -- argument parsing --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="magiccert", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version",
                        version=f"magiccert {__version__} (format {FORMAT_VERSION})")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=4, help="matrix size")
    common.add_argument("--order", help="JSON file listing the n^2 [row, col] pairs from smallest to largest")
    common.add_argument("--degree-cap", type=int, default=12)
    common.add_argument("--out-dir", default=os.environ.get(OUT_ENV, DEFAULT_OUT),
                        help=f"artifact directory (default ${OUT_ENV} or {DEFAULT_OUT})")
    common.add_argument("--no-build", action="store_true", help="use cached artifacts only")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("gb", parents=[common], help="complete the magic unitary ideal")

    p = sub.add_parser("automaton", parents=[common], help="minimized normal-word automaton")
    p.add_argument("--dot", help="write Graphviz DOT here")
    p.add_argument("--count", type=int, help="count accepted words of each length up to this")
    p.add_argument("--growth", action="store_true")

    sub.add_parser("growth", parents=[common], help="exponential growth rate of the quotient")

    p = sub.add_parser("characters", parents=[common], help="permutations obtained from characters of M")
    p.add_argument("--model", help="model JSON (default: the built-in 4x4 model)")
    p.add_argument("--all", action="store_true", help="one row per assignment")

    p = sub.add_parser("certify", parents=[common], help="rank certificate for Psi_m")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--oracle", action="store_true", help="also compute the exact rank")
    p.add_argument("--max-memory", type=int, help="byte budget for column patterns")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--model", help="model JSON (required unless n = 4)")
    p.add_argument("--out", help="certificate JSON path")

    p = sub.add_parser("dims", parents=[common], help="dimension-gap crossing table")
    p.add_argument("--k", type=int, required=True, help="tensor legs")
    p.add_argument("--l", type=int, required=True, help="word length bound of the entries")
    p.add_argument("--cap", type=int, required=True)

    p = sub.add_parser("check", parents=[common], help="run the invariant suite")
    p.add_argument("--full", action="store_true", help="include the n = 5, 6 pipelines")
    return parser


COMMANDS = {
    "gb": cmd_gb, "automaton": cmd_automaton, "growth": cmd_growth, "characters": cmd_characters,
    "certify": cmd_certify, "dims": cmd_dims, "check": cmd_check,
}


def config_from_args(args) -> PipelineConfig:
    order = json.loads(Path(args.order).read_text()) if args.order else None
    return PipelineConfig(
        n=args.n, order=order, degree_cap=args.degree_cap,
        count=getattr(args, "count", None), growth=getattr(args, "growth", False),
        dot=getattr(args, "dot", None), m=getattr(args, "m", 0),
        max_memory=getattr(args, "max_memory", None), threads=getattr(args, "threads", 1),
        out_dir=args.out_dir, no_build=args.no_build,
    )


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO, stream=sys.stderr,
        format="magiccert %(levelname)s %(message)s", force=True,
    )
    report = RunReport(args.command)
    try:
        config = config_from_args(args)
        pipe = Pipeline(config, report)
    except (ValueError, OSError) as exc:
        parser.error(str(exc))
    code = EXIT_OK
    try:
        code = COMMANDS[args.command](pipe, args)
    except (MissingArtifact, MissingModel) as exc:
        log.error("stage=%s status=missing %s", args.command, exc)
        code = EXIT_MISSING
    except BudgetError as exc:
        log.error("stage=%s status=budget %s", args.command, exc)
        code = EXIT_BUDGET
    except CapExceeded as exc:
        log.error("stage=%s status=cap %s", args.command, exc)
        code = EXIT_CAP
    if args.command != "characters":
        write_json(pipe.out / f"config-{args.command}.json", config.to_json())
        write_json(pipe.out / f"report-{args.command}.json", report.to_json())
    return code


if __name__ == "__main__":
    sys.exit(main())
