"""Automata for factor-avoiding languages over X_n.

The quotient basis of Q<X_n>/I is the set of words avoiding every leading
term of a Gröbner basis as a factor.  ``forbidden_factor_dfa`` builds that
language directly with Aho-Corasick failure links; ``minimize`` applies
Hopcroft's partition refinement and renumbers states canonically.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .freealg import Monomial, MonomialOrder, Variable

DEFAULT_TOL = 1e-10
MAX_ITERATIONS = 1_000_000
POLYNOMIAL_GROWTH_EPS = 1e-9


class DegenerateLanguage(ValueError):
    pass


class FiniteLanguage(ArithmeticError):
    """The automaton has no cycle; its growth rate is 0."""


@dataclass(frozen=True)
class Dfa:
    """Partial deterministic automaton over the variable indices of X_n.

    ``symbols`` lists the alphabet in increasing variable rank; canonical
    orderings (BFS numbering, path enumeration) follow it.
    """

    n: int
    transitions: Tuple[Dict[int, int], ...]
    finals: frozenset
    initial: int = 0
    symbols: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not self.symbols:
            object.__setattr__(self, "symbols", tuple(range(self.n * self.n)))

    @property
    def num_states(self) -> int:
        return len(self.transitions)

    @property
    def num_edges(self) -> int:
        return sum(len(t) for t in self.transitions)

    def step(self, state: Optional[int], symbol: int) -> Optional[int]:
        if state is None:
            return None
        return self.transitions[state].get(symbol)

    def run(self, word: Iterable[int]) -> Optional[int]:
        s: Optional[int] = self.initial
        for a in word:
            s = self.step(s, a)
            if s is None:
                return None
        return s

    def accepts(self, word: Iterable[int]) -> bool:
        s = self.run(word)
        return s is not None and s in self.finals

    def count_matrix(self) -> np.ndarray:
        """``A[s, t]`` = number of symbols leading from s to t."""
        A = np.zeros((self.num_states, self.num_states))
        for s, trans in enumerate(self.transitions):
            for t in trans.values():
                A[s, t] += 1
        return A

    def to_json(self) -> dict:
        n = self.n
        return {
            "states": self.num_states,
            "initial": self.initial,
            "finals": sorted(self.finals),
            "transitions": [
                [s, [a // n + 1, a % n + 1], t]
                for s, trans in enumerate(self.transitions)
                for a, t in sorted(trans.items(), key=lambda kv: self.symbols.index(kv[0]))
            ],
            "symbol_order": [[a // n + 1, a % n + 1] for a in self.symbols],
        }

    @classmethod
    def from_json(cls, data: dict, n: int) -> "Dfa":
        trans: List[Dict[int, int]] = [dict() for _ in range(data["states"])]
        for s, (i, j), t in data["transitions"]:
            trans[s][(i - 1) * n + (j - 1)] = t
        symbols = tuple((i - 1) * n + (j - 1) for i, j in data.get("symbol_order", ()))
        return cls(n, tuple(trans), frozenset(data["finals"]), data["initial"], symbols)


def symbols_for(order: MonomialOrder) -> Tuple[int, ...]:
    return tuple(sorted(range(order.n * order.n), key=order.ranks.__getitem__))


def _trim(dfa: Dfa) -> Dfa:
    """Drop states that are unreachable or cannot reach a final state."""
    reach = {dfa.initial}
    todo = [dfa.initial]
    while todo:
        s = todo.pop()
        for t in dfa.transitions[s].values():
            if t not in reach:
                reach.add(t)
                todo.append(t)
    rev: Dict[int, set] = {}
    for s in reach:
        for t in dfa.transitions[s].values():
            rev.setdefault(t, set()).add(s)
    live = {s for s in reach if s in dfa.finals}
    todo = list(live)
    while todo:
        t = todo.pop()
        for s in rev.get(t, ()):
            if s not in live:
                live.add(s)
                todo.append(s)
    if dfa.initial not in live:
        # empty language: keep a lone non-final initial state
        return Dfa(dfa.n, ({},), frozenset(), 0, dfa.symbols)
    return _renumber(dfa, keep=live)


def _renumber(dfa: Dfa, keep: Optional[set] = None) -> Dfa:
    """Canonical numbering: BFS from the initial state, symbols by rank."""
    order = {dfa.initial: 0}
    queue = deque([dfa.initial])
    while queue:
        s = queue.popleft()
        trans = dfa.transitions[s]
        for a in dfa.symbols:
            t = trans.get(a)
            if t is None or (keep is not None and t not in keep):
                continue
            if t not in order:
                order[t] = len(order)
                queue.append(t)
    new: List[Dict[int, int]] = [dict() for _ in order]
    for s, i in order.items():
        for a in dfa.symbols:
            t = dfa.transitions[s].get(a)
            if t is not None and t in order:
                new[i][a] = order[t]
    finals = frozenset(order[s] for s in dfa.finals if s in order)
    return Dfa(dfa.n, tuple(new), finals, 0, dfa.symbols)


def forbidden_factor_dfa(
    leads: Iterable[Monomial], n: int, symbols: Optional[Sequence[int]] = None
) -> Dfa:
    """Automaton accepting the words over X_n with no factor in ``leads``.

    States are the prefixes of the leads (an Aho-Corasick trie); failure
    links complete the transition function, and every state whose current
    suffix matches a lead is deleted.  All surviving states are final.
    """
    leads = [tuple(w) for w in leads]
    if not leads:
        raise DegenerateLanguage("need at least one forbidden word")
    if any(len(w) == 0 for w in leads):
        raise DegenerateLanguage("the empty word is forbidden: the language is empty")
    symbols = tuple(symbols) if symbols else tuple(range(n * n))

    goto: List[Dict[int, int]] = [{}]
    matched = [False]
    for w in leads:
        s = 0
        for a in w:
            t = goto[s].get(a)
            if t is None:
                t = len(goto)
                goto.append({})
                matched.append(False)
                goto[s][a] = t
            s = t
        matched[s] = True

    fail = [0] * len(goto)
    delta: List[Dict[int, int]] = [dict() for _ in goto]
    queue = deque()
    for a in symbols:
        t = goto[0].get(a, 0)
        delta[0][a] = t
        if t:
            queue.append(t)
    while queue:
        s = queue.popleft()
        matched[s] = matched[s] or matched[fail[s]]
        for a in symbols:
            t = goto[s].get(a)
            if t is None:
                delta[s][a] = delta[fail[s]][a]
            else:
                fail[t] = delta[fail[s]][a]
                delta[s][a] = t
                queue.append(t)

    trans = tuple(
        {a: t for a, t in delta[s].items() if not matched[t]} if not matched[s] else {}
        for s in range(len(goto))
    )
    finals = frozenset(s for s in range(len(goto)) if not matched[s])
    return _trim(Dfa(n, trans, finals, 0, symbols))


def minimize(dfa: Dfa) -> Dfa:
    """Hopcroft minimization followed by canonical BFS renumbering."""
    dfa = _trim(dfa)
    ns = dfa.num_states
    sink = ns  # completes the partial transition function
    symbols = dfa.symbols
    inverse: Dict[Tuple[int, int], List[int]] = {}
    for s in range(ns + 1):
        trans = dfa.transitions[s] if s < ns else {}
        for a in symbols:
            t = trans.get(a, sink)
            inverse.setdefault((a, t), []).append(s)

    finals = set(dfa.finals)
    others = set(range(ns + 1)) - finals
    partition: List[set] = [b for b in (finals, others) if b]
    block_of = [0] * (ns + 1)
    for i, b in enumerate(partition):
        for s in b:
            block_of[s] = i
    work = {min(range(len(partition)), key=lambda i: len(partition[i]))} if len(partition) > 1 else set()

    while work:
        splitter = partition[work.pop()]
        splitter_items = list(splitter)
        for a in symbols:
            pre: set = set()
            for t in splitter_items:
                pre.update(inverse.get((a, t), ()))
            if not pre:
                continue
            touched: Dict[int, set] = {}
            for s in pre:
                touched.setdefault(block_of[s], set()).add(s)
            for bi, inside in touched.items():
                block = partition[bi]
                if len(inside) == len(block):
                    continue
                outside = block - inside
                partition[bi] = inside
                partition.append(outside)
                ni = len(partition) - 1
                for s in outside:
                    block_of[s] = ni
                if bi in work:
                    work.add(ni)
                else:
                    work.add(bi if len(inside) <= len(outside) else ni)

    sink_block = block_of[sink]
    trans: List[Dict[int, int]] = [dict() for _ in partition]
    for s in range(ns):
        b = block_of[s]
        for a, t in dfa.transitions[s].items():
            if block_of[t] != sink_block:
                trans[b][a] = block_of[t]
    new_finals = frozenset(block_of[s] for s in finals)
    merged = Dfa(dfa.n, tuple(trans), new_finals, block_of[dfa.initial], symbols)
    return _renumber(merged)


def quotient_automaton(gb, minimized: bool = True) -> Dfa:
    """Minimal automaton of the normal words of a Gröbner basis."""
    dfa = forbidden_factor_dfa(gb.leads, gb.n, symbols_for(gb.order))
    return minimize(dfa) if minimized else dfa


# -- counting ---------------------------------------------------------------------

@dataclass(frozen=True)
class LengthCounts:
    counts: Tuple[int, ...]

    @property
    def cumulative(self) -> Tuple[int, ...]:
        out, total = [], 0
        for c in self.counts:
            total += c
            out.append(total)
        return tuple(out)

    @property
    def total(self) -> int:
        return sum(self.counts)


def count_by_length(dfa: Dfa, m: int) -> LengthCounts:
    """Exact number of accepted words of each length 0..m."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    edges = [list(t.values()) for t in dfa.transitions]
    vec = [0] * dfa.num_states
    vec[dfa.initial] = 1
    finals = sorted(dfa.finals)
    counts = []
    for k in range(m + 1):
        counts.append(sum(vec[s] for s in finals))
        if k == m:
            break
        nxt = [0] * dfa.num_states
        for s, v in enumerate(vec):
            if v:
                for t in edges[s]:
                    nxt[t] += v
        vec = nxt
    return LengthCounts(tuple(counts))


def _sccs(dfa: Dfa) -> List[List[int]]:
    """Tarjan's strongly connected components (iterative)."""
    index: Dict[int, int] = {}
    low: Dict[int, int] = {}
    on_stack: set = set()
    stack: List[int] = []
    comps: List[List[int]] = []
    counter = 0
    for root in range(dfa.num_states):
        if root in index:
            continue
        work = [(root, iter(dfa.transitions[root].values()))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(dfa.transitions[w].values())))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
    return comps


def cycle_structure(dfa: Dfa) -> str:
    """'finite', 'polynomial' or 'exponential' growth of the accepted language.

    Growth is polynomial exactly when every strongly connected component is a
    single simple cycle (or acyclic), since then the spectral radius is 1.
    """
    has_cycle = False
    for comp in _sccs(dfa):
        members = set(comp)
        internal = sum(
            1 for s in comp for t in dfa.transitions[s].values() if t in members
        )
        if internal == 0:
            continue
        has_cycle = True
        if internal > len(comp):
            return "exponential"
    return "polynomial" if has_cycle else "finite"


def growth_rate(dfa: Dfa, tol: float = DEFAULT_TOL, max_iter: int = MAX_ITERATIONS) -> float:
    """Dominant eigenvalue of the transition-count matrix.

    Power iteration from the all-ones vector until successive Rayleigh
    quotients agree to ``tol``.  Languages with polynomial growth return
    exactly 1.0; a finite language raises :class:`FiniteLanguage`.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    kind = cycle_structure(dfa)
    if kind == "finite":
        raise FiniteLanguage("no cycle: the language is finite (growth 0)")
    if kind == "polynomial":
        return 1.0
    A = dfa.count_matrix()
    # shifting by the identity removes periodic oscillation without moving
    # the Perron root relative to the rest of the spectrum
    B = A + np.eye(len(A))
    x = np.ones(len(A))
    x /= np.linalg.norm(x)
    prev = None
    for _ in range(max_iter):
        y = B @ x
        rq = float(x @ y)
        x = y / np.linalg.norm(y)
        if prev is not None and abs(rq - prev) < tol:
            break
        prev = rq
    rate = rq - 1.0
    return 1.0 if rate < 1.0 + POLYNOMIAL_GROWTH_EPS else rate


# -- enumeration and export -------------------------------------------------------

def enumerate_paths(dfa: Dfa, m: int) -> Iterator[Tuple[Monomial, Tuple[int, ...]]]:
    """Accepted words of length <= m in breadth-first (degree-lex) order.

    Yields ``(word, trace)`` where ``trace`` lists the visited states.
    """
    if m < 0:
        return
    queue = deque([((), (dfa.initial,))])
    while queue:
        word, trace = queue.popleft()
        s = trace[-1]
        if s in dfa.finals:
            yield word, trace
        if len(word) < m:
            trans = dfa.transitions[s]
            for a in dfa.symbols:
                t = trans.get(a)
                if t is not None:
                    queue.append((word + (a,), trace + (t,)))


def export_dot(dfa: Dfa, name: str = "quotient_basis") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  __start [shape=point, label=""];']
    for s in range(dfa.num_states):
        shape = "doublecircle" if s in dfa.finals else "circle"
        lines.append(f'  {s} [shape={shape}, label="{s}"];')
    lines.append(f"  __start -> {dfa.initial};")
    for s, trans in enumerate(dfa.transitions):
        for a in dfa.symbols:
            t = trans.get(a)
            if t is not None:
                v = Variable.from_index(a, dfa.n)
                lines.append(f'  {s} -> {t} [label="{v}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- cross-check route: union of "contains s" automata, then complement -------------

def complement_of_union_dfa(leads: Iterable[Monomial], n: int) -> Dfa:
    """Same language as :func:`forbidden_factor_dfa`, built the textbook way.

    For every forbidden word s an NFA for "contains s" is formed; the union is
    determinized by subset construction and complemented.  Exponential in the
    worst case, so only meant for small alphabets.
    """
    leads = [tuple(w) for w in leads]
    if any(len(w) == 0 for w in leads):
        raise DegenerateLanguage("the empty word is forbidden: the language is empty")
    symbols = tuple(range(n * n))
    # NFA state (i, k): k letters of lead i matched; (i, len) is accepting and absorbing
    start = frozenset((i, 0) for i in range(len(leads)))

    def move(subset, a):
        out = set()
        for i, k in subset:
            w = leads[i]
            out.add((i, 0))
            if k == len(w):
                out.add((i, k))
            elif w[k] == a:
                out.add((i, k + 1))
        return frozenset(out)

    def accepting(subset):
        return any(k == len(leads[i]) for i, k in subset)

    ids = {start: 0}
    trans: List[Dict[int, int]] = [{}]
    queue = deque([start])
    while queue:
        sub = queue.popleft()
        sid = ids[sub]
        for a in symbols:
            nxt = move(sub, a)
            if nxt not in ids:
                ids[nxt] = len(ids)
                trans.append({})
                queue.append(nxt)
            trans[sid][a] = ids[nxt]
    # complement: finals are subsets with no completed match
    finals = frozenset(i for sub, i in ids.items() if not accepting(sub))
    return minimize(Dfa(n, tuple(trans), finals, 0, symbols))
