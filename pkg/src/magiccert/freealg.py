"""Free associative algebra Q<X_n> over the entries of an n x n matrix.

Variables are stored as integers: ``x_ij`` (1-based) is ``(i - 1) * n + (j - 1)``.
A monomial is a tuple of such integers, the empty tuple being the unit.
Coefficients are exact: Python ints where possible, ``Fraction`` otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Dict, Iterable, Iterator, Mapping, Sequence, Tuple, Union

Monomial = Tuple[int, ...]
Coeff = Union[int, Fraction]

ONE: Monomial = ()


class AlphabetMismatch(ValueError):
    pass


class ZeroPolynomialError(ValueError):
    pass


class InvalidSize(ValueError):
    pass


def normalize_coeff(c: Rational) -> Coeff:
    if isinstance(c, int):
        return c
    c = Fraction(c)
    return c.numerator if c.denominator == 1 else c


@dataclass(frozen=True)
class Variable:
    row: int
    col: int
    n: int

    def __post_init__(self) -> None:
        if not (1 <= self.row <= self.n and 1 <= self.col <= self.n):
            raise ValueError(f"x_{self.row}{self.col} outside a {self.n}x{self.n} matrix")

    @property
    def index(self) -> int:
        return (self.row - 1) * self.n + (self.col - 1)

    @classmethod
    def from_index(cls, index: int, n: int) -> "Variable":
        return cls(index // n + 1, index % n + 1, n)

    def __str__(self) -> str:
        sep = "_" if self.n > 9 else ""
        return f"x{self.row}{sep}{self.col}"


def var_index(i: int, j: int, n: int) -> int:
    return Variable(i, j, n).index


def monomial(pairs: Iterable[Sequence[int]], n: int) -> Monomial:
    """Build a monomial from 1-based ``(row, col)`` pairs."""
    return tuple(var_index(i, j, n) for i, j in pairs)


def monomial_pairs(word: Monomial, n: int) -> list:
    return [[v // n + 1, v % n + 1] for v in word]


def format_monomial(word: Monomial, n: int) -> str:
    if not word:
        return "1"
    return "*".join(str(Variable.from_index(v, n)) for v in word)


@dataclass(frozen=True)
class MonomialOrder:
    """Degree-lexicographic order induced by a ranking of the n^2 variables.

    ``ranks[v]`` is the rank of variable index ``v``; the default ranks
    variables row-major ascending, x_11 < x_12 < ... < x_nn.
    """

    n: int
    ranks: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not self.ranks:
            object.__setattr__(self, "ranks", tuple(range(self.n * self.n)))
        if sorted(self.ranks) != list(range(self.n * self.n)):
            raise ValueError("variable ranks must be a permutation of 0..n^2-1")

    @classmethod
    def from_variables(cls, variables: Sequence[Sequence[int]], n: int) -> "MonomialOrder":
        """Order given as the list of (row, col) pairs from smallest to largest."""
        ranks = [0] * (n * n)
        for rank, (i, j) in enumerate(variables):
            ranks[var_index(i, j, n)] = rank
        return cls(n, tuple(ranks))

    def variables(self) -> list:
        """Serialized form: (row, col) pairs listed from smallest to largest."""
        inv = sorted(range(self.n * self.n), key=self.ranks.__getitem__)
        return [[v // self.n + 1, v % self.n + 1] for v in inv]

    @property
    def is_default(self) -> bool:
        return self.ranks == tuple(range(self.n * self.n))

    def key(self, word: Monomial) -> Tuple[int, Tuple[int, ...]]:
        r = self.ranks
        return len(word), tuple(r[v] for v in word)

    def compare(self, a: Monomial, b: Monomial) -> int:
        ka, kb = self.key(a), self.key(b)
        return (ka > kb) - (ka < kb)


@dataclass(frozen=True)
class Polynomial:
    """Element of Q<X_n>; ``terms`` never holds zero coefficients."""

    n: int
    terms: Mapping[Monomial, Coeff] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidSize("matrix size must be positive")
        clean: Dict[Monomial, Coeff] = {}
        for w, c in self.terms.items():
            if c:
                clean[tuple(w)] = normalize_coeff(c)
        object.__setattr__(self, "terms", clean)

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "Polynomial":
        return cls(n, {})

    @classmethod
    def one(cls, n: int) -> "Polynomial":
        return cls(n, {ONE: 1})

    @classmethod
    def var(cls, i: int, j: int, n: int) -> "Polynomial":
        return cls(n, {(var_index(i, j, n),): 1})

    @classmethod
    def from_word(cls, word: Monomial, n: int, coeff: Coeff = 1) -> "Polynomial":
        return cls(n, {tuple(word): coeff})

    # -- arithmetic -------------------------------------------------------
    def _check(self, other: "Polynomial") -> None:
        if self.n != other.n:
            raise AlphabetMismatch(f"X_{self.n} vs X_{other.n}")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, Rational):
            return Polynomial(self.n, {ONE: other})
        return NotImplemented

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return Polynomial(self.n, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.n, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def __mul__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return multiply(self, other)

    def __rmul__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return multiply(other, self)

    def __pow__(self, e: int) -> "Polynomial":
        out = Polynomial.one(self.n)
        for _ in range(e):
            out = out * self
        return out

    # -- queries ----------------------------------------------------------
    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, Rational):
            other = Polynomial(self.n, {ONE: other})
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.n, frozenset(self.terms.items())))

    def __iter__(self) -> Iterator[Tuple[Monomial, Coeff]]:
        return iter(self.terms.items())

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(len(w) for w in self.terms)

    def coefficient(self, word: Monomial) -> Coeff:
        return self.terms.get(tuple(word), 0)

    def __repr__(self) -> str:
        return f"Polynomial({self.n}, {format_polynomial(self)!r})"


def format_polynomial(p: Polynomial, order: MonomialOrder | None = None) -> str:
    if not p.terms:
        return "0"
    order = order or MonomialOrder(p.n)
    parts = []
    for w in sorted(p.terms, key=order.key, reverse=True):
        c = p.terms[w]
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        body = format_monomial(w, p.n)
        if mag == 1 and w:
            term = body
        elif not w:
            term = str(mag)
        else:
            term = f"{mag}*{body}"
        parts.append((sign, term))
    first_sign, first = parts[0]
    text = ("-" if first_sign == "-" else "") + first
    for sign, term in parts[1:]:
        text += f" {sign} {term}"
    return text


def compare(a: Monomial, b: Monomial, order: MonomialOrder) -> int:
    """-1, 0 or 1 as ``a`` is less than, equal to or greater than ``b``."""
    bound = len(order.ranks)
    for w in (a, b):
        if any(not 0 <= v < bound for v in w):
            raise AlphabetMismatch(f"monomial {w} is not a word over X_{order.n}")
    return order.compare(tuple(a), tuple(b))


def multiply(p: Polynomial, q: Polynomial) -> Polynomial:
    p._check(q)
    out: Dict[Monomial, Coeff] = {}
    for u, a in p.terms.items():
        for v, b in q.terms.items():
            w = u + v
            out[w] = out.get(w, 0) + a * b
    return Polynomial(p.n, out)


def leading_term(p: Polynomial, order: MonomialOrder | None = None) -> Tuple[Monomial, Coeff]:
    if not p.terms:
        raise ZeroPolynomialError("the zero polynomial has no leading term")
    order = order or MonomialOrder(p.n)
    if order.n != p.n:
        raise AlphabetMismatch(f"order on X_{order.n} applied to X_{p.n}")
    w = max(p.terms, key=order.key)
    return w, p.terms[w]


def magic_ideal_generators(n: int) -> list:
    """Generators of the magic unitary ideal I_n.

    Order of the output: idempotents x_ij^2 - x_ij, row sums, column sums,
    then x_ij x_ik and x_ji x_ki for every ordered pair j != k.
    """
    if n < 1:
        raise InvalidSize("n must be at least 1")
    x = lambda i, j: var_index(i, j, n)  # noqa: E731
    gens = []
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            gens.append(Polynomial(n, {(x(i, j), x(i, j)): 1, (x(i, j),): -1}))
    for i in range(1, n + 1):
        row = {(x(i, k),): 1 for k in range(1, n + 1)}
        row[ONE] = -1
        gens.append(Polynomial(n, row))
    for j in range(1, n + 1):
        col = {(x(k, j),): 1 for k in range(1, n + 1)}
        col[ONE] = -1
        gens.append(Polynomial(n, col))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            for k in range(1, n + 1):
                if j != k:
                    gens.append(Polynomial(n, {(x(i, j), x(i, k)): 1}))
                    gens.append(Polynomial(n, {(x(j, i), x(k, i)): 1}))
    return gens


# -- serialization ----------------------------------------------------------

def coeff_to_str(c: Coeff) -> str:
    return str(normalize_coeff(c))


def coeff_from_str(text: str) -> Coeff:
    return normalize_coeff(Fraction(text))


def polynomial_to_json(p: Polynomial, order: MonomialOrder | None = None) -> list:
    order = order or MonomialOrder(p.n)
    return [
        {"monomial": monomial_pairs(w, p.n), "coeff": coeff_to_str(c)}
        for w, c in sorted(p.terms.items(), key=lambda t: order.key(t[0]), reverse=True)
    ]


def polynomial_from_json(data: list, n: int) -> Polynomial:
    out: Dict[Monomial, Coeff] = {}
    for term in data:
        w = monomial(term["monomial"], n)
        out[w] = out.get(w, 0) + coeff_from_str(term["coeff"])
    return Polynomial(n, out)
