"""Noncommutative Buchberger completion, normal forms and ideal membership.

Internally every word is rewritten into *rank space* (each variable replaced
by its rank under the active order) so that degree-lex comparison is plain
``(len(w), w)`` tuple comparison.  Public functions take and return
:class:`~magiccert.freealg.Polynomial` objects over the original alphabet.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .exactla import clear_denominators, integer_echelon
from .freealg import (
    AlphabetMismatch,
    Coeff,
    Monomial,
    MonomialOrder,
    Polynomial,
    format_monomial,
    magic_ideal_generators,
    normalize_coeff,
    polynomial_from_json,
    polynomial_to_json,
)

log = logging.getLogger(__name__)

Terms = Dict[Monomial, Coeff]

DEFAULT_DEGREE_CAP = 12


class CapExceeded(RuntimeError):
    """Completion still had obstructions above the degree cap."""

    def __init__(self, message: str, partial: "GroebnerBasis"):
        super().__init__(message)
        self.partial = partial


class UncertifiedDegree(ValueError):
    pass


class BudgetError(MemoryError):
    pass


@dataclass(frozen=True)
class RewriteRule:
    """``lead -> tail``: the basis element is ``lead - tail`` (monic)."""

    lead: Monomial
    tail: Polynomial

    def polynomial(self) -> Polynomial:
        return Polynomial.from_word(self.lead, self.tail.n) - self.tail


@dataclass(frozen=True)
class Obstruction:
    """Overlap of two leads: ``lead_i[-overlap:] == lead_j[:overlap]``."""

    i: int
    j: int
    overlap: int
    word: Monomial

    @property
    def degree(self) -> int:
        return len(self.word)


# -- rank-space kernel --------------------------------------------------------

class _RuleSet:
    """Mutable rewriting system over rank-space words."""

    def __init__(self) -> None:
        self.rules: Dict[Monomial, Terms] = {}
        self._lengths: List[int] = []
        self._cache: Dict[Monomial, Terms] = {}

    def _refresh(self) -> None:
        self._lengths = sorted({len(w) for w in self.rules})
        self._cache: Dict[Monomial, Terms] = {}

    def add(self, lead: Monomial, tail: Terms) -> None:
        self.rules[lead] = tail
        self._refresh()

    def remove(self, lead: Monomial) -> Terms:
        tail = self.rules.pop(lead)
        self._refresh()
        return tail

    def word_normal_form(self, w: Monomial) -> Terms:
        """Normal form of a single word, memoized until the rules change."""
        cache = self._cache
        hit = cache.get(w)
        if hit is not None:
            return hit
        found = self.find(w)
        if found is None:
            out = {w: 1}
        else:
            s, ln, tail = found
            pre, post = w[:s], w[s + ln:]
            out = {}
            for u, d in tail.items():
                for v, e in self.word_normal_form(pre + u + post).items():
                    x = out.get(v, 0) + d * e
                    if x:
                        out[v] = x
                    else:
                        del out[v]
        cache[w] = out
        return out

    def normal_form(self, terms: Terms) -> Terms:
        """Normal form as a linear combination of memoized word normal forms."""
        out: Terms = {}
        for w, c in terms.items():
            for v, e in self.word_normal_form(w).items():
                x = out.get(v, 0) + c * e
                if x:
                    out[v] = x
                else:
                    del out[v]
        return {w: normalize_coeff(c) for w, c in out.items()}

    def find(self, w: Monomial) -> Optional[Tuple[int, int, Terms]]:
        """Leftmost reducible position of ``w`` (shortest lead on ties)."""
        rules = self.rules
        lengths = self._lengths
        n = len(w)
        for s in range(n):
            for ln in lengths:
                if s + ln > n:
                    break
                tail = rules.get(w[s:s + ln])
                if tail is not None:
                    return s, ln, tail
        return None

    def is_normal(self, w: Monomial) -> bool:
        return self.find(w) is None

    def normal_form_stepwise(self, terms: Terms) -> Terms:
        """Full reduction, always rewriting the largest reducible monomial.

        Agrees with :meth:`normal_form` whenever the rules are confluent.
        """
        work: Terms = {}
        heap: list = []
        for w, c in terms.items():
            if c:
                work[w] = c
                heap.append((-len(w), tuple(-v for v in w), w))
        heapq.heapify(heap)
        out: Terms = {}
        find = self.find
        while heap:
            w = heapq.heappop(heap)[2]
            c = work.pop(w, 0)
            if not c:
                continue
            hit = find(w)
            if hit is None:
                out[w] = c
                continue
            s, ln, tail = hit
            pre, post = w[:s], w[s + ln:]
            for u, d in tail.items():
                nw = pre + u + post
                old = work.get(nw)
                if old is None:
                    work[nw] = c * d
                    heapq.heappush(heap, (-len(nw), tuple(-v for v in nw), nw))
                else:
                    new = old + c * d
                    if new:
                        work[nw] = new
                    else:
                        del work[nw]
        return {w: normalize_coeff(c) for w, c in out.items()}


def _lead(terms: Terms) -> Monomial:
    return max(terms, key=lambda w: (len(w), w))


def _monic(terms: Terms) -> Tuple[Monomial, Terms]:
    lead = _lead(terms)
    lc = terms[lead]
    tail = {}
    for w, c in terms.items():
        if w != lead:
            tail[w] = normalize_coeff(Fraction(-c) / lc) if lc != 1 else -c
    return lead, tail


def _contains(big: Monomial, small: Monomial) -> bool:
    ls = len(small)
    return any(big[s:s + ls] == small for s in range(len(big) - ls + 1))


def _overlaps(a: Monomial, b: Monomial) -> Iterator[int]:
    """Proper overlaps k: suffix of a of length k equals prefix of b."""
    for k in range(1, min(len(a), len(b))):
        if a[-k:] == b[:k]:
            yield k


def _mul_word(terms: Terms, left: Monomial, right: Monomial) -> Terms:
    return {left + w + right: c for w, c in terms.items()}


def _sub(a: Terms, b: Terms) -> Terms:
    out = dict(a)
    for w, c in b.items():
        v = out.get(w, 0) - c
        if v:
            out[w] = v
        else:
            out.pop(w, None)
    return out


def _s_poly(a: Monomial, ta: Terms, b: Monomial, tb: Terms, k: int) -> Terms:
    # a * b[k:] == a[:-k] * b; both reduce to tails
    return _sub(_mul_word(ta, (), b[k:]), _mul_word(tb, a[:len(a) - k], ()))


class _Completion:
    """Buchberger loop with the normal (degree-first) selection strategy."""

    def __init__(self, degree_cap: int, max_rules: Optional[int] = None):
        self.rs = _RuleSet()
        self.degree_cap = degree_cap
        self.max_rules = max_rules
        self.heap: list = []
        self.by_prefix: Dict[Monomial, set] = {}
        self.stats = {"obstructions": 0, "reductions_to_zero": 0, "rules_added": 0}

    # prefix index lets new leads find partners without scanning all rules
    def _index(self, lead: Monomial, add: bool) -> None:
        for k in range(1, len(lead)):
            bucket = self.by_prefix.setdefault(lead[:k], set())
            if add:
                bucket.add(lead)
            else:
                bucket.discard(lead)

    def _push_obstructions(self, new: Monomial) -> None:
        rules = self.rs.rules
        # new as left factor
        for k in range(1, len(new)):
            for b in self.by_prefix.get(new[-k:], ()):
                if k < len(b) and b in rules:
                    self._push(new, b, k)
        # new as right factor
        for a in list(rules):
            if a == new:
                continue
            for k in _overlaps(a, new):
                self._push(a, new, k)

    def _push(self, a: Monomial, b: Monomial, k: int) -> None:
        deg = len(a) + len(b) - k
        heapq.heappush(self.heap, (deg, a, b, k))

    def insert(self, terms: Terms) -> None:
        """Reduce ``terms`` and add the result as a rule, interreducing leads."""
        pending = [terms]
        while pending:
            nf = self.rs.normal_form(pending.pop())
            if not nf:
                self.stats["reductions_to_zero"] += 1
                continue
            lead, tail = _monic(nf)
            for old in [w for w in self.rs.rules if _contains(w, lead)]:
                old_tail = self.rs.remove(old)
                self._index(old, add=False)
                full = dict(old_tail)
                full = {w: -c for w, c in full.items()}
                full[old] = full.get(old, 0) + 1
                pending.append(full)
            self.rs.add(lead, tail)
            self._index(lead, add=True)
            self.stats["rules_added"] += 1
            self._push_obstructions(lead)
            if self.max_rules is not None and len(self.rs.rules) > self.max_rules:
                raise BudgetError(f"more than {self.max_rules} rules")

    def run(self) -> bool:
        """Process obstructions; return True when none remain (terminated).

        All pending obstructions of the current minimal degree are reduced
        against one frozen rule set (sharing the normal-form cache); the
        nonzero remainders are inserted afterwards, smallest lead first.
        """
        rules = self.rs.rules
        heap = self.heap
        while heap:
            deg = heap[0][0]
            if deg > self.degree_cap:
                while heap and (heap[0][1] not in rules or heap[0][2] not in rules):
                    heapq.heappop(heap)
                if heap:
                    return False
                break
            batch = []
            while heap and heap[0][0] == deg:
                _, a, b, k = heapq.heappop(heap)
                if a in rules and b in rules:
                    batch.append((a, b, k))
            remainders = []
            for a, b, k in batch:
                self.stats["obstructions"] += 1
                nf = self.rs.normal_form(_s_poly(a, rules[a], b, rules[b], k))
                if nf:
                    remainders.append(nf)
                else:
                    self.stats["reductions_to_zero"] += 1
            remainders.sort(key=lambda t: (len(_lead(t)), _lead(t)))
            for r in remainders:
                self.insert(r)
        return True

    def interreduce_tails(self) -> None:
        rs = self.rs
        for lead in sorted(rs.rules, key=lambda w: (len(w), w)):
            tail = rs.rules.pop(lead)
            rs.rules[lead] = rs.normal_form(tail)
        rs._refresh()

    def unresolved(self, limit: Optional[int] = None) -> List[Tuple[Monomial, Monomial, int]]:
        """Obstructions (up to the cap) whose S-polynomial has nonzero normal form."""
        rules = self.rs.rules
        bad = []
        for a in sorted(rules):
            for k in range(1, len(a)):
                for b in sorted(self.by_prefix.get(a[-k:], ())):
                    if k >= len(b) or b not in rules:
                        continue
                    if len(a) + len(b) - k > self.degree_cap:
                        continue
                    if self.rs.normal_form(_s_poly(a, rules[a], b, rules[b], k)):
                        bad.append((a, b, k))
                        if limit is not None and len(bad) >= limit:
                            return bad
        return bad


# -- public API -----------------------------------------------------------------

@dataclass
class GroebnerBasis:
    """Reduced, monic Gröbner basis stored as a rewriting system.

    ``complete_up_to`` is ``None`` when completion terminated, otherwise the
    degree up to which all obstructions are known to resolve.
    """

    n: int
    order: MonomialOrder
    rules: List[RewriteRule]
    complete_up_to: Optional[int] = None
    stats: dict = field(default_factory=dict)
    _rs: _RuleSet = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self._rs is None:
            self._rs = _RuleSet()
            for r in self.rules:
                self._rs.rules[_to_rank(r.lead, self.order)] = _terms_to_rank(r.tail.terms, self.order)
            self._rs._refresh()

    @property
    def terminated(self) -> bool:
        return self.complete_up_to is None

    @property
    def leads(self) -> List[Monomial]:
        return [r.lead for r in self.rules]

    @property
    def max_lead_degree(self) -> int:
        return max((len(r.lead) for r in self.rules), default=0)

    def summary(self) -> dict:
        return {
            "rule_count": len(self.rules),
            "max_lead_degree": self.max_lead_degree,
            "terminated": self.terminated,
        }

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "order": self.order.variables(),
            "complete_up_to": self.complete_up_to,
            "rules": [polynomial_to_json(r.polynomial(), self.order) for r in self.rules],
            "summary": self.summary(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "GroebnerBasis":
        n = data["n"]
        order = MonomialOrder.from_variables(data["order"], n)
        rules = []
        for terms in data["rules"]:
            p = polynomial_from_json(terms, n)
            lead = max(p.terms, key=order.key)
            assert p.terms[lead] == 1
            rules.append(RewriteRule(lead, Polynomial.from_word(lead, n) - p))
        return cls(n, order, rules, data.get("complete_up_to"))

    def __str__(self) -> str:
        lines = [f"Groebner basis of {len(self.rules)} rules over X_{self.n}"]
        for r in self.rules:
            lines.append(f"  {format_monomial(r.lead, self.n)} -> {r.tail}")
        return "\n".join(lines)


def _to_rank(w: Monomial, order: MonomialOrder) -> Monomial:
    r = order.ranks
    return tuple(r[v] for v in w)


def _from_rank(w: Monomial, inverse: Sequence[int]) -> Monomial:
    return tuple(inverse[v] for v in w)


def _terms_to_rank(terms, order: MonomialOrder) -> Terms:
    return {_to_rank(w, order): c for w, c in terms.items()}


def _inverse(order: MonomialOrder) -> List[int]:
    inv = [0] * len(order.ranks)
    for v, r in enumerate(order.ranks):
        inv[r] = v
    return inv


def complete(
    generators: Iterable[Polynomial],
    order: Optional[MonomialOrder] = None,
    degree_cap: int = DEFAULT_DEGREE_CAP,
    max_rules: Optional[int] = None,
    verify: bool = False,
) -> GroebnerBasis:
    """Complete ``generators`` to a reduced Gröbner basis.

    Raises :class:`CapExceeded` (carrying the partial basis) when obstructions
    of degree above ``degree_cap`` remain.  ``verify`` re-reduces every
    obstruction of the final interreduced basis and resumes completion if
    any fails; it roughly doubles the cost.
    """
    gens = [g for g in generators]
    if not gens:
        raise ValueError("need at least one generator")
    n = gens[0].n
    order = order or MonomialOrder(n)
    if any(g.n != n for g in gens) or order.n != n:
        raise AlphabetMismatch("generators and order must share one alphabet")
    if any(not g for g in gens):
        raise ValueError("generators must be nonzero")
    if degree_cap < max(g.degree for g in gens):
        raise ValueError("degree cap below the generator degree")

    comp = _Completion(degree_cap, max_rules)
    for g in sorted(gens, key=lambda g: order.key(max(g.terms, key=order.key))):
        comp.insert(_terms_to_rank(g.terms, order))

    while True:
        done = comp.run()
        comp.interreduce_tails()
        if not verify:
            break
        bad = comp.unresolved()
        if not bad:
            break
        log.warning("%d obstructions unresolved after interreduction; resuming", len(bad))
        for a, b, k in bad:
            comp._push(a, b, k)

    inv = _inverse(order)
    rules = [
        RewriteRule(
            _from_rank(lead, inv),
            Polynomial(n, {_from_rank(w, inv): c for w, c in tail.items()}),
        )
        for lead, tail in sorted(comp.rs.rules.items(), key=lambda t: (len(t[0]), t[0]))
    ]
    stats = dict(comp.stats)
    gb = GroebnerBasis(n, order, rules, None if done else degree_cap, stats, comp.rs)
    if not done:
        raise CapExceeded(
            f"obstructions of degree > {degree_cap} remain ({len(rules)} rules so far)", gb
        )
    return gb


def reduce(p: Polynomial, gb: GroebnerBasis, stepwise: bool = False) -> Polynomial:
    """Normal form of ``p``: its component in the span of normal words.

    By default words are reduced independently through a memo table.  With
    ``stepwise`` the largest reducible monomial is rewritten first, at its
    leftmost reducible position; for a complete basis both give the same
    result.
    """
    if p.n != gb.n:
        raise AlphabetMismatch(f"X_{p.n} polynomial against a basis over X_{gb.n}")
    terms = _terms_to_rank(p.terms, gb.order)
    nf = gb._rs.normal_form_stepwise(terms) if stepwise else gb._rs.normal_form(terms)
    inv = _inverse(gb.order)
    return Polynomial(gb.n, {_from_rank(w, inv): c for w, c in nf.items()})


def is_member(p: Polynomial, gb: GroebnerBasis) -> bool:
    if not gb.terminated and p.degree > gb.complete_up_to:
        raise UncertifiedDegree(
            f"degree {p.degree} exceeds the certified range {gb.complete_up_to}"
        )
    return not reduce(p, gb)


def is_normal_word(word: Monomial, gb: GroebnerBasis) -> bool:
    return gb._rs.is_normal(_to_rank(tuple(word), gb.order))


def obstructions(gb: GroebnerBasis) -> List[Obstruction]:
    """Every proper overlap between leads of ``gb`` (indices into ``gb.rules``)."""
    out = []
    leads = gb.leads
    for i, a in enumerate(leads):
        for j, b in enumerate(leads):
            for k in _overlaps(a, b):
                out.append(Obstruction(i, j, k, a + b[k:]))
    return out


def unresolved_obstructions(gb: GroebnerBasis, max_degree: Optional[int] = None) -> List[Obstruction]:
    """Obstructions whose S-polynomial does not reduce to zero.

    Empty for a complete basis (up to ``max_degree`` when given).
    """
    bad = []
    for ob in obstructions(gb):
        if max_degree is not None and ob.degree > max_degree:
            continue
        if reduce(s_polynomial(gb, ob), gb):
            bad.append(ob)
    return bad


def s_polynomial(gb: GroebnerBasis, ob: Obstruction) -> Polynomial:
    a, b = gb.rules[ob.i], gb.rules[ob.j]
    k = ob.overlap
    return a.tail * Polynomial.from_word(b.lead[k:], gb.n) - Polynomial.from_word(
        a.lead[: len(a.lead) - k], gb.n
    ) * b.tail


def magic_basis(n: int, order: Optional[MonomialOrder] = None, degree_cap: int = DEFAULT_DEGREE_CAP) -> GroebnerBasis:
    return complete(magic_ideal_generators(n), order, degree_cap)


# -- independent oracle -----------------------------------------------------------

def _words(alphabet: int, d: int) -> Iterator[Monomial]:
    from itertools import product

    for length in range(d + 1):
        yield from product(range(alphabet), repeat=length)


def quotient_slice_dimension_oracle(
    generators: Sequence[Polynomial], d: int, max_rows: int = 100_000
) -> int:
    """Codimension of the ideal's degree-<=d slice, by exact linear algebra.

    Spans ``a*g*b`` over all words ``a, b`` with ``deg(a g b) <= d`` inside the
    space of polynomials of degree <= d and returns ``dim - rank``, the rank
    coming from fraction-free integer elimination.  This bounds ``dim V_d``
    from above and does not touch any Gröbner machinery.  The spanning set
    grows like ``(n^2)^d``: for n = 4, d = 3 takes seconds, while d = 4 needs
    about 217k rows and is refused under the default ``max_rows``.
    """
    gens = list(generators)
    n = gens[0].n
    alphabet = n * n
    n_rows = sum((d - g.degree + 1) * alphabet ** max(d - g.degree, 0)
                 for g in gens if g.degree <= d)
    if n_rows > max_rows:
        raise BudgetError(f"about {n_rows} spanning rows for d = {d} exceeds the budget of {max_rows}")
    index = {w: i for i, w in enumerate(_words(alphabet, d))}
    dim = len(index)

    def spanning_rows():
        for g in gens:
            gterms = clear_denominators(dict(enumerate(g.terms.values())))
            gwords = list(g.terms)
            gd = g.degree
            for la in range(d - gd + 1):
                for a in _words_exact(alphabet, la):
                    for lb in range(d - gd - la + 1):
                        for b in _words_exact(alphabet, lb):
                            yield {index[a + gwords[i] + b]: c for i, c in gterms.items()}

    rank, _ = integer_echelon(spanning_rows())
    return dim - rank


def _words_exact(alphabet: int, length: int) -> Iterator[Monomial]:
    from itertools import product

    return product(range(alphabet), repeat=length)
