"""Matrix of the evaluation map on normal words, and its rank certification.

``build_psi`` evaluates every normal word of degree <= m at a model, one
column per word, and keeps only the nonzero pattern.  ``eliminate`` runs the
cascading singleton-row pivoting that bounds the rank from below without
touching any values.  ``exact_rank_oracle`` and ``kernel_vector`` redo the
linear algebra exactly (from :func:`magiccert.projalg.evaluate`) on small
instances.
"""

from __future__ import annotations

import hashlib
import json
import logging
import resource
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from . import __version__
from .automaton import Dfa, count_by_length, enumerate_paths, quotient_automaton
from .exactla import integer_echelon
from .freealg import Monomial, Polynomial
from .ncgroebner import BudgetError, magic_basis
from .projalg import MagicModel, build_M, evaluate, mul_index, tensor_index

log = logging.getLogger(__name__)

VERDICT_OK = "no-separating-polynomial"
VERDICT_INCONCLUSIVE = "inconclusive"

_INT64_SAFE = 1 << 62


class MissingModel(LookupError):
    pass


# -- sparse pattern matrix -----------------------------------------------------------

@dataclass
class SparseMatrix:
    """Nonzero pattern of Psi_m, stored column-major with a row-major mirror.

    Row keys are mixed-radix tensor-word indices (``radix`` per leg, ``k``
    legs); column ``j`` holds ``row_keys[col_ptr[j]:col_ptr[j+1]]``.
    """

    n_cols: int
    col_ptr: np.ndarray
    row_keys: np.ndarray
    radix: int = 1
    k: int = 1
    _csr: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]] = field(default=None, repr=False)

    @classmethod
    def from_columns(cls, columns: Sequence[Iterable[int]], radix: int = 1, k: int = 1) -> "SparseMatrix":
        arrays = [np.unique(np.asarray(list(c) if not isinstance(c, np.ndarray) else c, dtype=np.int64))
                  for c in columns]
        ptr = np.zeros(len(arrays) + 1, dtype=np.int64)
        ptr[1:] = np.cumsum([len(a) for a in arrays])
        keys = np.concatenate(arrays) if arrays else np.zeros(0, dtype=np.int64)
        return cls(len(arrays), ptr, keys.astype(np.int64), radix, k)

    @property
    def nonzeros(self) -> int:
        return int(self.col_ptr[-1])

    def column(self, j: int) -> np.ndarray:
        return self.row_keys[self.col_ptr[j]:self.col_ptr[j + 1]]

    def csr(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(row_key_values, row_ptr, col_idx)``: the row-major mirror."""
        if self._csr is None:
            cols = np.repeat(np.arange(self.n_cols, dtype=np.int64), np.diff(self.col_ptr))
            order = np.lexsort((cols, self.row_keys))
            keys_sorted = self.row_keys[order]
            uniq, counts = np.unique(keys_sorted, return_counts=True)
            ptr = np.zeros(len(uniq) + 1, dtype=np.int64)
            ptr[1:] = np.cumsum(counts)
            self._csr = (uniq, ptr, cols[order])
        return self._csr

    @property
    def n_rows_touched(self) -> int:
        return len(self.csr()[0])

    def rows(self) -> Dict[int, Set[int]]:
        keys, ptr, cols = self.csr()
        return {int(keys[i]): set(cols[ptr[i]:ptr[i + 1]].tolist()) for i in range(len(keys))}

    def columns(self) -> Dict[int, Set[int]]:
        return {j: set(self.column(j).tolist()) for j in range(self.n_cols)}

    def check_mirror(self) -> bool:
        """Every (row, column) pair appears in both orientations."""
        keys, ptr, cols = self.csr()
        row_pairs = set(zip(np.repeat(keys, np.diff(ptr)).tolist(), cols.tolist()))
        col_pairs = set(
            zip(self.row_keys.tolist(),
                np.repeat(np.arange(self.n_cols), np.diff(self.col_ptr)).tolist())
        )
        return row_pairs == col_pairs and len(row_pairs) == self.nonzeros

    def max_leg_length(self) -> int:
        if not self.nonzeros:
            return 0
        keys = self.row_keys.copy()
        best = 0
        for _ in range(self.k):
            keys, r = np.divmod(keys, self.radix)
            best = max(best, int(((r + 1) // 2).max()))
        return best


# -- construction -----------------------------------------------------------------------

class _Evaluator:
    """Vectorized right multiplication by model entries in code space."""

    def __init__(self, model: MagicModel, m: int):
        ell = max(model.max_word_length, 1)
        self.k = model.k
        self.radix = 2 * m * ell + 1
        width = 2 * ell + 1
        table = np.full((self.radix, width), -1, dtype=np.int64)
        for a in range(self.radix):
            for b in range(width):
                c = mul_index(a, b)
                if c < self.radix:
                    table[a, b] = c
        self.table = table
        self.powers = np.array([self.radix ** (self.k - 1 - i) for i in range(self.k)], dtype=np.int64)
        self.entries = []
        self.l1 = []
        for v in range(model.n * model.n):
            e = model.entry_by_index(v)
            legs = np.array(sorted(e.terms), dtype=np.int64).reshape(-1, self.k)
            coeffs = [e.terms[tuple(w)] for w in legs.tolist()]
            self.entries.append((legs, coeffs))
            self.l1.append(sum(abs(c) for c in coeffs))
        self.unit_code = np.zeros(1, dtype=np.int64)

    def decode(self, codes: np.ndarray) -> np.ndarray:
        out = np.empty((len(codes), self.k), dtype=np.int64)
        rest = codes
        for i in range(self.k - 1, -1, -1):
            rest, out[:, i] = np.divmod(rest, self.radix)
        return out

    def times(self, codes: np.ndarray, coeffs: np.ndarray, l1: int, v: int):
        """``P * M_v`` for ``P = sum coeffs * codes``; returns codes, coeffs, L1 norm."""
        legs_b, cb = self.entries[v]
        if not len(legs_b) or not len(codes):
            return codes[:0], coeffs[:0], 0
        bound = l1 * self.l1[v]
        dtype = np.int64 if bound < _INT64_SAFE and coeffs.dtype != object else object
        if coeffs.dtype != dtype:
            coeffs = coeffs.astype(dtype)
        legs_a = self.decode(codes)
        parts_c, parts_v = [], []
        for legs, c in zip(legs_b, cb):
            new = np.zeros(len(codes), dtype=np.int64)
            for i in range(self.k):
                new += self.table[legs_a[:, i], legs[i]] * self.powers[i]
            parts_c.append(new)
            parts_v.append(coeffs * (c if dtype is object else np.int64(c)))
        allc = np.concatenate(parts_c)
        allv = np.concatenate(parts_v)
        order = np.argsort(allc, kind="stable")
        allc = allc[order]
        allv = allv[order]
        starts = np.flatnonzero(np.r_[True, allc[1:] != allc[:-1]])
        sums = np.add.reduceat(allv, starts)
        keep = sums != 0
        out_c = allc[starts][keep]
        out_v = sums[keep]
        if dtype is object:
            out_v = np.asarray(out_v, dtype=object)
            new_l1 = sum(abs(x) for x in out_v)
        else:
            new_l1 = int(np.abs(out_v).sum())
        return out_c, out_v, new_l1


@dataclass
class BuildProgress:
    columns_done: int
    depth_reached: int
    nonzeros: int
    bytes_used: int


def _subtree_columns(ev: _Evaluator, dfa: Dfa, m: int, start: Tuple[int, np.ndarray, np.ndarray, int],
                     depth0: int, budget: Optional[int], used: List[int]) -> List[List[np.ndarray]]:
    """Column patterns of a DFS subtree, grouped by depth, each group in lex order."""
    by_depth: List[List[np.ndarray]] = [[] for _ in range(m + 1)]
    stack = [(start[0], start[1], start[2], start[3], depth0)]
    while stack:
        s, codes, coeffs, l1, d = stack.pop()
        by_depth[d].append(codes)
        used[0] += codes.nbytes
        if budget is not None and used[0] > budget:
            done = sum(len(x) for x in by_depth)
            raise BudgetError(
                f"memory budget of {budget} bytes exceeded after {done} columns "
                f"(depth {d} of {m}, {used[0]} bytes of patterns)"
            )
        if d == m:
            continue
        trans = dfa.transitions[s]
        children = []
        for a in dfa.symbols:
            t = trans.get(a)
            if t is not None:
                c2, v2, l2 = ev.times(codes, coeffs, l1, a)
                children.append((t, c2, v2, l2, d + 1))
        stack.extend(reversed(children))
    return by_depth


def build_psi(model: MagicModel, dfa: Dfa, m: int, threads: int = 1,
              max_memory: Optional[int] = None) -> SparseMatrix:
    """Pattern of Psi_m: one column per accepted word of length <= m.

    Columns follow :func:`~magiccert.automaton.enumerate_paths` order.  Words
    are expanded depth-first per first-letter subtree (optionally on several
    threads) and merged back into breadth-first order.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    if dfa.n != model.n:
        raise ValueError(f"automaton over X_{dfa.n} but model is {model.n}x{model.n}")
    if any(s not in dfa.finals for s in range(dfa.num_states)):
        raise ValueError("every automaton state must be final")
    ev = _Evaluator(model, m)
    unit_coeffs = np.ones(1, dtype=np.int64)
    root = dfa.initial
    used = [0]
    by_depth: List[List[np.ndarray]] = [[ev.unit_code]] + [[] for _ in range(m)]
    if m > 0:
        tasks = []
        for a in dfa.symbols:
            t = dfa.transitions[root].get(a)
            if t is not None:
                tasks.append((a, t))

        def work(task):
            a, t = task
            c, v, l1 = ev.times(ev.unit_code, unit_coeffs, 1, a)
            return _subtree_columns(ev, dfa, m, (t, c, v, l1), 1, max_memory, used)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(work, tasks))
        else:
            results = [work(t) for t in tasks]
        for res in results:
            for d in range(1, m + 1):
                by_depth[d].extend(res[d])
    cols = [c for group in by_depth for c in group]
    ptr = np.zeros(len(cols) + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(c) for c in cols])
    keys = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    return SparseMatrix(len(cols), ptr, keys, ev.radix, ev.k)


# -- elimination -------------------------------------------------------------------------

def eliminate(mat: SparseMatrix) -> int:
    """Rank lower bound by cascading singleton-row pivots.

    Purely structural.  Each row tracks how many live columns it still has
    and the XOR of their indices, which names the survivor once the count
    drops to one.  Rows emptied before they are popped are skipped.
    """
    keys, row_ptr, cols_by_row = mat.csr()
    n_rows = len(keys)
    if n_rows == 0:
        return 0
    count = np.diff(row_ptr).tolist()
    # xor of column indices per row
    row_of_nz = np.repeat(np.arange(n_rows, dtype=np.int64), np.diff(row_ptr))
    xor = np.zeros(n_rows, dtype=np.int64)
    np.bitwise_xor.at(xor, row_of_nz, cols_by_row)
    xor = xor.tolist()
    # column -> compact row ids
    row_id = np.searchsorted(keys, mat.row_keys)
    col_ptr = mat.col_ptr.tolist()
    col_rows = row_id.tolist()

    rank = 0
    stack = [i for i in range(n_rows) if count[i] == 1]
    while stack:
        i = stack.pop()
        if count[i] != 1:
            continue
        j = xor[i]
        for idx in range(col_ptr[j], col_ptr[j + 1]):
            r = col_rows[idx]
            if r != i:
                count[r] -= 1
                xor[r] ^= j
                if count[r] == 1:
                    stack.append(r)
        rank += 1
    return rank


def eliminate_sets(rows: Dict[int, Set[int]], columns: Dict[int, Set[int]],
                   check_mirror: bool = False) -> int:
    """Literal dictionary-of-sets transcription of the pivoting algorithm.

    Mutates its arguments.  With ``check_mirror`` the row/column maps are
    verified to stay consistent after every pivot.
    """
    rank = 0
    stack = [i for i in sorted(rows) if len(rows[i]) == 1]
    while stack:
        i = stack.pop()
        if len(rows[i]) != 1:
            continue
        (j,) = rows[i]
        for r in columns[j]:
            if r != i:
                rows[r].discard(j)
                if len(rows[r]) == 1:
                    stack.append(r)
        columns[j] = {i}
        rank += 1
        if check_mirror:
            _assert_mirror(rows, columns)
    return rank


def _assert_mirror(rows, columns) -> None:
    a = {(i, j) for i, js in rows.items() for j in js}
    b = {(i, j) for j, is_ in columns.items() for i in is_}
    if a != b:
        raise AssertionError("row and column maps diverged")


# -- exact oracles ---------------------------------------------------------------------

def normal_words(dfa: Dfa, m: int) -> List[Monomial]:
    return [w for w, _ in enumerate_paths(dfa, m)]


def column_values(model: MagicModel, words: Sequence[Monomial], radix: int) -> List[Dict[int, int]]:
    """Exact column coefficients via the dictionary evaluator, keyed like ``build_psi``."""
    out = []
    for w in words:
        e = evaluate(Polynomial.from_word(w, model.n), model)
        out.append({tensor_index(t, radix): c for t, c in e.terms.items()})
    return out


def exact_rank_oracle(mat: SparseMatrix, values: Sequence[Mapping[int, int]],
                      max_columns: int = 5000) -> int:
    """True rank of Psi_m over Q from exact coefficient values.

    ``values[j]`` maps row keys to the integer coefficients of column ``j``;
    its support must coincide with the pattern stored in ``mat``.
    """
    if mat.n_cols > max_columns:
        raise BudgetError(f"{mat.n_cols} columns exceeds the oracle budget of {max_columns}")
    if len(values) != mat.n_cols:
        raise ValueError("one value map per column required")
    for j, col in enumerate(values):
        support = np.array(sorted(k for k, c in col.items() if c), dtype=np.int64)
        if not np.array_equal(support, np.sort(mat.column(j))):
            raise ValueError(f"values of column {j} disagree with the stored pattern")
    rank, _ = integer_echelon(values)
    return rank


def kernel_vector(mat: SparseMatrix, values: Sequence[Mapping[int, int]],
                  words: Sequence[Monomial], model: MagicModel) -> Optional[Polynomial]:
    """A nonzero combination of normal words killed by the model, or ``None``.

    Normal words are independent modulo the ideal, so any such combination is
    a separating polynomial.  The result is re-evaluated before returning.
    """
    if len(words) != mat.n_cols or len(values) != mat.n_cols:
        raise ValueError("need one word and one value map per column")
    _, combo = integer_echelon(values, track=True, stop_at_dependency=True)
    if combo is None:
        return None
    poly = Polynomial(model.n, {tuple(words[j]): c for j, c in combo.items()})
    if evaluate(poly, model):
        raise ArithmeticError("kernel combination does not vanish at the model")
    return poly


# -- certificates --------------------------------------------------------------------

@dataclass
class Certificate:
    n: int
    m: int
    columns: int
    rank_lower_bound: int
    verdict: str
    nonzeros: int
    wall_seconds: float
    model_sha256: str
    version: str = __version__
    peak_memory_bytes: int = 0
    rows_touched: int = 0
    oracle_rank: Optional[int] = None

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "columns": str(self.columns),
            "rank_lower_bound": str(self.rank_lower_bound),
            "verdict": self.verdict,
            "nonzeros": str(self.nonzeros),
            "wall_seconds": self.wall_seconds,
            "model_sha256": self.model_sha256,
            "version": self.version,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Certificate":
        return cls(
            n=data["n"], m=data["m"], columns=int(data["columns"]),
            rank_lower_bound=int(data["rank_lower_bound"]), verdict=data["verdict"],
            nonzeros=int(data["nonzeros"]), wall_seconds=data["wall_seconds"],
            model_sha256=data["model_sha256"], version=data["version"],
        )


def model_fingerprint(model: MagicModel) -> str:
    blob = json.dumps(model.to_json(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _peak_rss() -> int:
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024


_PIPELINE: Dict[int, Dfa] = {}


def default_automaton(n: int) -> Dfa:
    if n not in _PIPELINE:
        _PIPELINE[n] = quotient_automaton(magic_basis(n))
    return _PIPELINE[n]


def certify(m: int, n: int = 4, model: Optional[MagicModel] = None, dfa: Optional[Dfa] = None,
            threads: int = 1, max_memory: Optional[int] = None, oracle: bool = False) -> Certificate:
    """Build Psi_m, eliminate, and state the verdict.

    The bound is one-sided: a shortfall yields ``inconclusive``, never a claim
    that a separating polynomial exists.
    """
    if model is None:
        if n != 4:
            raise MissingModel(f"no built-in model for n = {n}; supply one")
        model = build_M()
    if model.n != n:
        raise ValueError(f"model is {model.n}x{model.n}, expected n = {n}")
    dfa = dfa or default_automaton(n)
    t0 = time.perf_counter()
    mat = build_psi(model, dfa, m, threads=threads, max_memory=max_memory)
    bound = eliminate(mat)
    wall = time.perf_counter() - t0
    cert = Certificate(
        n=n, m=m, columns=mat.n_cols, rank_lower_bound=bound,
        verdict=VERDICT_OK if bound == mat.n_cols else VERDICT_INCONCLUSIVE,
        nonzeros=mat.nonzeros, wall_seconds=round(wall, 3),
        model_sha256=model_fingerprint(model), peak_memory_bytes=_peak_rss(),
        rows_touched=mat.n_rows_touched,
    )
    if oracle:
        words = normal_words(dfa, m)
        cert.oracle_rank = exact_rank_oracle(mat, column_values(model, words, mat.radix))
    log.info("certify n=%d m=%d columns=%d bound=%d nnz=%d %.2fs",
             n, m, cert.columns, bound, cert.nonzeros, wall)
    return cert


# -- dimension gap -----------------------------------------------------------------------

def dimension_gap(n: int, k: int, l: int, cap: int, dfa: Optional[Dfa] = None) -> Optional[int]:
    """Smallest m <= cap with (#normal words of degree <= m) > (2m+1)^(k*l).

    Such an m forces a nonzero kernel for every n x n magic unitary whose
    entries lie in the span of tensor words of k legs and length <= l.
    """
    if k < 1 or l < 1:
        raise ValueError("k and l must be positive")
    dfa = dfa or default_automaton(n)
    vec = [0] * dfa.num_states
    vec[dfa.initial] = 1
    edges = [list(t.values()) for t in dfa.transitions]
    finals = sorted(dfa.finals)
    total = 0
    for m in range(cap + 1):
        total += sum(vec[s] for s in finals)
        if total > (2 * m + 1) ** (k * l):
            return m
        nxt = [0] * dfa.num_states
        for s, v in enumerate(vec):
            if v:
                for t in edges[s]:
                    nxt[t] += v
        vec = nxt
    return None


def crossing_table(n: int, k: int, l: int, cap: int, dfa: Optional[Dfa] = None) -> List[Tuple[int, int, int]]:
    """Rows ``(m, cumulative normal words, (2m+1)^(k*l))`` up to the first crossing."""
    dfa = dfa or default_automaton(n)
    rows = []
    crossing = dimension_gap(n, k, l, cap, dfa)
    last = cap if crossing is None else crossing
    cum = count_by_length(dfa, last).cumulative
    for m in range(last + 1):
        rows.append((m, cum[m], (2 * m + 1) ** (k * l)))
    return rows
