"""Exact arithmetic in A^{(x)k}, A the algebra generated by two projections.

A basis of A is given by the alternating words 1, p, q, pq, qp, pqp, ...,
each determined by its length and first letter.  We index them as

    unit -> 0,   length l starting with p -> 2l - 1,   starting with q -> 2l

so that the words of length <= m are exactly the indices 0..2m.  A tensor
word is a k-tuple of such indices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .freealg import Polynomial

TensorWord = Tuple[int, ...]


class ShapeError(ValueError):
    pass


class ModelViolation(ArithmeticError):
    """A character of a magic unitary failed to be a permutation matrix."""


# -- alternating words ------------------------------------------------------------

@dataclass(frozen=True)
class AltWord:
    length: int
    first: str = "p"

    def __post_init__(self) -> None:
        if self.length < 0:
            raise ValueError("length must be nonnegative")
        if self.length == 0:
            object.__setattr__(self, "first", "1")
        elif self.first not in ("p", "q"):
            raise ValueError("first letter must be 'p' or 'q'")

    @property
    def index(self) -> int:
        if self.length == 0:
            return 0
        return 2 * self.length - (1 if self.first == "p" else 0)

    @classmethod
    def from_index(cls, index: int) -> "AltWord":
        if index == 0:
            return cls(0)
        return cls((index + 1) // 2, "p" if index % 2 else "q")

    @property
    def last(self) -> str:
        if self.length == 0:
            return "1"
        if self.length % 2:
            return self.first
        return "q" if self.first == "p" else "p"

    def __str__(self) -> str:
        if self.length == 0:
            return "1"
        other = "q" if self.first == "p" else "p"
        return "".join(self.first if i % 2 == 0 else other for i in range(self.length))


def mul_index(a: int, b: int) -> int:
    """Product of two alternating words given by index (p*p = p merging)."""
    if a == 0:
        return b
    if b == 0:
        return a
    la, lb = (a + 1) >> 1, (b + 1) >> 1
    a_first_p = a & 1
    a_last_p = a_first_p if la & 1 else 1 - a_first_p
    length = la + lb - 1 if a_last_p == (b & 1) else la + lb
    return 2 * length - 1 if a_first_p else 2 * length


def mul_alt(a: AltWord, b: AltWord) -> AltWord:
    return AltWord.from_index(mul_index(a.index, b.index))


def alt_words(m: int) -> List[AltWord]:
    """The 2m + 1 alternating words with at most m factors."""
    return [AltWord.from_index(i) for i in range(2 * m + 1)]


def tensor_index(word: TensorWord, radix: int) -> int:
    """Mixed-radix integer of a tensor word (first leg most significant)."""
    code = 0
    for leg in word:
        if not 0 <= leg < radix:
            raise ValueError(f"leg index {leg} outside radix {radix}")
        code = code * radix + leg
    return code


def tensor_word(code: int, k: int, radix: int) -> TensorWord:
    legs = []
    for _ in range(k):
        code, r = divmod(code, radix)
        legs.append(r)
    return tuple(reversed(legs))


# -- elements -----------------------------------------------------------------------

@dataclass(frozen=True)
class AlgElement:
    """Exact element of A^{(x)k} in the basis of tensor words."""

    k: int
    terms: Mapping[TensorWord, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean = {}
        for w, c in self.terms.items():
            w = tuple(w)
            if len(w) != self.k:
                raise ShapeError(f"tensor word {w} does not have {self.k} legs")
            if c:
                clean[w] = c
        object.__setattr__(self, "terms", clean)

    @classmethod
    def zero(cls, k: int) -> "AlgElement":
        return cls(k, {})

    @classmethod
    def unit(cls, k: int) -> "AlgElement":
        return cls(k, {(0,) * k: 1})

    @classmethod
    def basis(cls, *legs: AltWord) -> "AlgElement":
        return cls(len(legs), {tuple(a.index for a in legs): 1})

    def _check(self, other: "AlgElement") -> None:
        if self.k != other.k:
            raise ShapeError(f"{self.k} legs vs {other.k} legs")

    def __add__(self, other: "AlgElement") -> "AlgElement":
        if isinstance(other, int):
            other = other * AlgElement.unit(self.k)
        self._check(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return AlgElement(self.k, out)

    __radd__ = __add__

    def __neg__(self) -> "AlgElement":
        return AlgElement(self.k, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other) -> "AlgElement":
        if isinstance(other, int):
            other = other * AlgElement.unit(self.k)
        return self + (-other)

    def __rsub__(self, other) -> "AlgElement":
        return (-self) + other

    def __mul__(self, other) -> "AlgElement":
        if isinstance(other, int):
            return AlgElement(self.k, {w: c * other for w, c in self.terms.items()})
        return mul_elements(self, other)

    def __rmul__(self, other) -> "AlgElement":
        if isinstance(other, int):
            return self * other
        return NotImplemented

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = other * AlgElement.unit(self.k)
        if not isinstance(other, AlgElement):
            return NotImplemented
        return self.k == other.k and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.k, frozenset(self.terms.items())))

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def max_leg_length(self) -> int:
        return max(((i + 1) // 2 for w in self.terms for i in w), default=0)

    def tensor(self, other: "AlgElement") -> "AlgElement":
        """Tensor product, legs of ``self`` first."""
        return AlgElement(
            self.k + other.k,
            {a + b: c * d for a, c in self.terms.items() for b, d in other.terms.items()},
        )

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w, c in sorted(self.terms.items()):
            body = "⊗".join(str(AltWord.from_index(i)) for i in w)
            parts.append(f"{c:+d}*{body}")
        return " ".join(parts)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "terms": [
                {
                    "legs": [[a.length, a.first] for a in map(AltWord.from_index, w)],
                    "coeff": str(c),
                }
                for w, c in sorted(self.terms.items())
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "AlgElement":
        terms: Dict[TensorWord, int] = {}
        for t in data["terms"]:
            w = tuple(AltWord(length, first).index for length, first in t["legs"])
            terms[w] = terms.get(w, 0) + int(t["coeff"])
        return cls(data["k"], terms)


def mul_elements(a: AlgElement, b: AlgElement) -> AlgElement:
    a._check(b)
    out: Dict[TensorWord, int] = {}
    for u, c in a.terms.items():
        for v, d in b.terms.items():
            w = tuple(mul_index(x, y) for x, y in zip(u, v))
            out[w] = out.get(w, 0) + c * d
    return AlgElement(a.k, out)


P = AltWord(1, "p")
Q = AltWord(1, "q")


def generator(letter: str, leg: int = 0, k: int = 1) -> AlgElement:
    """``p`` or ``q`` placed in tensor leg ``leg`` (0-based)."""
    legs = [0] * k
    legs[leg] = AltWord(1, letter).index
    return AlgElement(k, {tuple(legs): 1})


# -- models -------------------------------------------------------------------------

@dataclass(frozen=True)
class MagicModel:
    n: int
    k: int
    entries: Tuple[Tuple[AlgElement, ...], ...]
    name: str = ""

    def __post_init__(self) -> None:
        if len(self.entries) != self.n or any(len(r) != self.n for r in self.entries):
            raise ShapeError(f"entries must form a {self.n}x{self.n} array")
        if any(e.k != self.k for r in self.entries for e in r):
            raise ShapeError(f"all entries must have {self.k} legs")

    def __getitem__(self, ij: Tuple[int, int]) -> AlgElement:
        """1-based entry access, ``model[i, j]``."""
        i, j = ij
        return self.entries[i - 1][j - 1]

    @property
    def max_word_length(self) -> int:
        return max(e.max_leg_length for r in self.entries for e in r)

    def entry_by_index(self, v: int) -> AlgElement:
        return self.entries[v // self.n][v % self.n]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "name": self.name,
            "entries": [[e.to_json() for e in row] for row in self.entries],
        }

    @classmethod
    def from_json(cls, data: dict) -> "MagicModel":
        entries = tuple(tuple(AlgElement.from_json(e) for e in row) for row in data["entries"])
        return cls(data["n"], data["k"], entries, data.get("name", ""))


def build_R() -> MagicModel:
    p, q = generator("p"), generator("q")
    one, zero = AlgElement.unit(1), AlgElement.zero(1)
    rows = (
        (p, zero, one - p, zero),
        (one - p, zero, p, zero),
        (zero, q, zero, one - q),
        (zero, one - q, zero, q),
    )
    return MagicModel(4, 1, rows, "R")


def operp(m1: MagicModel, m2: MagicModel) -> MagicModel:
    """``(m1 ⊙ m2)_ij = sum_k m1_ik ⊗ m2_kj``."""
    if m1.n != m2.n:
        raise ShapeError(f"cannot combine {m1.n}x{m1.n} with {m2.n}x{m2.n}")
    n, k = m1.n, m1.k + m2.k
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = AlgElement.zero(k)
            for t in range(n):
                acc = acc + m1.entries[i][t].tensor(m2.entries[t][j])
            row.append(acc)
        rows.append(tuple(row))
    name = f"({m1.name}⊙{m2.name})" if m1.name and m2.name else ""
    return MagicModel(n, k, tuple(rows), name)


def power(model: MagicModel, times: int) -> MagicModel:
    """``model ⊙ (model ⊙ (... ⊙ model))`` with ``times`` factors."""
    if times < 1:
        raise ValueError("need at least one factor")
    out = model
    for _ in range(times - 1):
        out = operp(model, out)
    base = model.name or "R"
    return MagicModel(out.n, out.k, out.entries, f"{base}^{times}" if times > 1 else base)


def build_M() -> MagicModel:
    R = build_R()
    m = operp(R, operp(R, R))
    return MagicModel(m.n, m.k, m.entries, "M")


def magic_unitary_violation(m: MagicModel) -> Optional[str]:
    """First violated magic-unitary relation, or ``None``."""
    one = AlgElement.unit(m.k)
    E = m.entries
    n = m.n
    for i in range(n):
        for j in range(n):
            if E[i][j] * E[i][j] != E[i][j]:
                return f"entry ({i + 1},{j + 1}) is not idempotent"
    for i in range(n):
        total = AlgElement.zero(m.k)
        for j in range(n):
            total = total + E[i][j]
        if total != one:
            return f"row {i + 1} does not sum to 1"
    for j in range(n):
        total = AlgElement.zero(m.k)
        for i in range(n):
            total = total + E[i][j]
        if total != one:
            return f"column {j + 1} does not sum to 1"
    for i in range(n):
        for j in range(n):
            for t in range(n):
                if j == t:
                    continue
                if E[i][j] * E[i][t]:
                    return f"entries ({i + 1},{j + 1}) and ({i + 1},{t + 1}) are not orthogonal"
                if E[j][i] * E[t][i]:
                    return f"entries ({j + 1},{i + 1}) and ({t + 1},{i + 1}) are not orthogonal"
    return None


def is_magic_unitary(m: MagicModel) -> bool:
    return magic_unitary_violation(m) is None


def evaluate(p: Polynomial, m: MagicModel) -> AlgElement:
    """Substitute ``x_ij -> m_ij`` into ``p``."""
    if p.n != m.n:
        raise ShapeError(f"polynomial over X_{p.n} evaluated at a {m.n}x{m.n} model")
    out = AlgElement.zero(m.k)
    cache: Dict[Tuple[int, ...], AlgElement] = {(): AlgElement.unit(m.k)}

    def word_value(w):
        hit = cache.get(w)
        if hit is None:
            hit = word_value(w[:-1]) * m.entry_by_index(w[-1])
            cache[w] = hit
        return hit

    for w, c in p.terms.items():
        if c.__class__ is not int and getattr(c, "denominator", 1) != 1:
            raise ValueError("only integer coefficients can be evaluated exactly in A^k")
        out = out + word_value(w) * int(c)
    return out


# -- characters ------------------------------------------------------------------

Permutation = Tuple[int, ...]


def _scalar(word_index: int, pv: int, qv: int) -> int:
    if word_index == 0:
        return 1
    length = (word_index + 1) // 2
    if length == 1:
        return pv if word_index & 1 else qv
    return pv * qv


def character(e: AlgElement, assignment: Sequence[Tuple[int, int]]) -> int:
    total = 0
    for w, c in e.terms.items():
        v = c
        for leg, (pv, qv) in zip(w, assignment):
            v *= _scalar(leg, pv, qv)
            if not v:
                break
        total += v
    return total


def character_matrix(m: MagicModel, assignment: Sequence[Tuple[int, int]]) -> Tuple[Tuple[int, ...], ...]:
    if len(assignment) != m.k:
        raise ShapeError(f"need one (p, q) pair per tensor leg ({m.k})")
    mat = tuple(tuple(character(e, assignment) for e in row) for row in m.entries)
    if not _is_permutation_matrix(mat):
        raise ModelViolation(f"character {tuple(assignment)} gave non-permutation {mat}")
    return mat


def _is_permutation_matrix(mat) -> bool:
    n = len(mat)
    if any(v not in (0, 1) for row in mat for v in row):
        return False
    return all(sum(row) == 1 for row in mat) and all(
        sum(mat[i][j] for i in range(n)) == 1 for j in range(n)
    )


def matrix_to_permutation(mat) -> Permutation:
    """0-based images: ``sigma[i] = j`` when ``mat[i][j] == 1``."""
    return tuple(row.index(1) for row in map(list, mat))


def cycle_notation(sigma: Permutation) -> str:
    seen = set()
    cycles = []
    for start in range(len(sigma)):
        if start in seen or sigma[start] == start:
            continue
        cyc = [start]
        seen.add(start)
        nxt = sigma[start]
        while nxt != start:
            cyc.append(nxt)
            seen.add(nxt)
            nxt = sigma[nxt]
        cycles.append("(" + "".join(str(c + 1) for c in cyc) + ")")
    return "".join(cycles) or "()"


def assignments(k: int) -> Iterable[Tuple[Tuple[int, int], ...]]:
    """All {0,1} values of (p_1, q_1, ..., p_k, q_k), in binary counting order."""
    for bits in itertools.product((0, 1), repeat=2 * k):
        yield tuple((bits[2 * i], bits[2 * i + 1]) for i in range(k))


def spectrum(m: MagicModel, where=None) -> Dict[Permutation, Tuple[Tuple[int, int], ...]]:
    """Distinct permutations reached by characters, each with a first witness.

    ``where`` optionally filters assignments.
    """
    out: Dict[Permutation, Tuple[Tuple[int, int], ...]] = {}
    for a in assignments(m.k):
        if where is not None and not where(a):
            continue
        sigma = matrix_to_permutation(character_matrix(m, a))
        out.setdefault(sigma, a)
    return out


def character_table(m: MagicModel) -> List[Tuple[str, Tuple[int, ...]]]:
    """One row per permutation: (cycle notation, p1 q1 p2 q2 ... bits)."""
    rows = []
    for sigma, a in spectrum(m).items():
        rows.append((cycle_notation(sigma), tuple(b for pair in a for b in pair)))
    return rows
