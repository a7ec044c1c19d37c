"""Invariant suite behind ``magiccert check``."""

from __future__ import annotations

import random
from dataclasses import replace
from math import comb
from typing import List, Tuple

from .automaton import count_by_length, growth_rate
from .certifier import build_psi, column_values, eliminate, exact_rank_oracle, normal_words
from .freealg import Polynomial, magic_ideal_generators, monomial
from .ncgroebner import is_normal_word, quotient_slice_dimension_oracle, reduce, unresolved_obstructions
from .projalg import build_M, build_R, evaluate, is_magic_unitary, power, spectrum

Result = Tuple[str, bool, str]


def _interreduced(gb) -> Tuple[bool, str]:
    leads = gb.leads
    lead_set = set(leads)
    for a in leads:
        for i in range(len(a)):
            for j in range(i + 1, len(a) + 1):
                if (i, j) != (0, len(a)) and a[i:j] in lead_set:
                    return False, f"lead {a} contains lead {a[i:j]}"
    for r in gb.rules:
        for w in r.tail.terms:
            if not is_normal_word(w, gb):
                return False, f"tail word {w} is reducible"
    return True, f"{len(leads)} rules"


def _pipeline_checks(pipe) -> List[Result]:
    n = pipe.config.n
    gb = pipe.groebner()
    dfa = pipe.automaton()
    out: List[Result] = []
    out.append(("gb interreduced", *_interreduced(gb)))
    pending = unresolved_obstructions(gb)
    out.append(("gb obstructions resolve", not pending, f"{len(pending)} pending"))
    out.append(("automaton all states final", len(dfa.finals) == dfa.num_states,
                f"{dfa.num_states} states"))
    rng = random.Random(0)
    bad = 0
    for _ in range(2000):
        w = tuple(rng.randrange(n * n) for _ in range(rng.randint(0, 5)))
        bad += dfa.accepts(w) != (reduce(Polynomial.from_word(w, n), gb) == Polynomial.from_word(w, n))
    out.append(("acceptance equals normal form", bad == 0, f"{bad} of 2000 sampled words disagree"))
    counts = list(count_by_length(dfa, 3).cumulative)
    if n <= 4:
        oracle = [quotient_slice_dimension_oracle(magic_ideal_generators(n), d) for d in range(3)]
        out.append(("slice oracle matches counts", oracle == counts[:3], f"{oracle} vs {counts[:3]}"))
    return out


def _n4_checks(pipe) -> List[Result]:
    dfa = pipe.automaton()
    gb = pipe.groebner()
    out: List[Result] = []
    c = count_by_length(dfa, 100)
    ok = all(c.counts[m] == (2 * m + 1) ** 2 and c.cumulative[m] == comb(2 * m + 3, 3) for m in range(101))
    out.append(("n=4 counts (2m+1)^2", ok, f"cumulative at 100 = {c.total}"))
    out.append(("n=4 state count", dfa.num_states == 17, f"{dfa.num_states}"))
    M = build_M()
    out.append(("M magic unitary", is_magic_unitary(M), "k = 3"))
    out.append(("characters give S4", len(spectrum(M)) == 24, f"{len(spectrum(M))} permutations"))
    x12 = Polynomial.from_word(monomial([(1, 2)], 4), 4)
    x12x24 = Polynomial.from_word(monomial([(1, 2), (2, 4)], 4), 4)
    R = build_R()
    ok = (not evaluate(x12, R) and not evaluate(x12x24, power(R, 2)) and bool(evaluate(x12x24, M))
          and bool(reduce(x12, gb)) and bool(reduce(x12x24, gb)))
    out.append(("separating polynomials of R, R^2", ok, "x12, x12 x24"))
    for m in range(7):
        mat = build_psi(M, dfa, m)
        bound = eliminate(mat)
        rank = exact_rank_oracle(mat, column_values(M, normal_words(dfa, m), mat.radix))
        out.append((f"Psi_{m} full rank", bound == rank == mat.n_cols,
                    f"columns {mat.n_cols}, bound {bound}, exact {rank}"))
    return out


def run_checks(pipe, full: bool = False) -> List[Result]:
    from .cli import Pipeline

    out = _pipeline_checks(pipe)
    if pipe.config.n == 4:
        out += _n4_checks(pipe)
    if full:
        for n, states, rate in ((5, 26, 6.854), (6, 37, 13.928)):
            sub = Pipeline(replace(pipe.config, n=n, order=None), pipe.report)
            dfa = sub.automaton()
            g = growth_rate(dfa)
            out.append((f"n={n} states", dfa.num_states == states, f"{dfa.num_states}"))
            out.append((f"n={n} growth", abs(g - rate) < 0.01, f"{g:.6f}"))
    return out
