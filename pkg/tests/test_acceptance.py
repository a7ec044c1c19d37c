"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is repeated in the terminal summary.
Tolerances: growth rates within 0.01; runtime limits as stated per test.
"""

import math
import os
import random
import resource
import time
from math import comb

import numpy as np
import pytest

from magiccert.automaton import count_by_length, growth_rate, quotient_automaton
from magiccert.certifier import (
    VERDICT_OK,
    SparseMatrix,
    build_psi,
    certify,
    column_values,
    dimension_gap,
    eliminate,
    exact_rank_oracle,
    normal_words,
)
from magiccert.freealg import Polynomial, magic_ideal_generators, monomial
from magiccert.ncgroebner import complete, reduce
from magiccert.projalg import (
    assignments,
    build_M,
    build_R,
    character_matrix,
    cycle_notation,
    evaluate,
    matrix_to_permutation,
    power,
)

GROWTH_TOL = 0.01
FULL_SCALE = os.environ.get("MAGICCERT_FULL_SCALE") == "1"

# printed reference table: permutation, then p1 q1 p2 q2 p3 q3
CHARACTER_TABLE = """
() 010101
(13)(24) 010110
(14)(23) 011001
(12)(34) 011010
(234) 001101
(132) 001110
(143) 000001
(124) 010000
(243) 000100
(134) 000111
(142) 001011
(123) 001000
(34) 000101
(1324) 000110
(1423) 001001
(12) 001010
(23) 001100
(1342) 001111
(14) 010001
(1243) 000000
(24) 010100
(13) 010111
(1432) 011011
(1234) 011000
"""


def test_quotient_dimension_identity(criterion):
    t0 = time.perf_counter()
    gb = complete(magic_ideal_generators(4))
    counts = count_by_length(quotient_automaton(gb), 100)
    elapsed = time.perf_counter() - t0
    ok = (all(counts.counts[m] == (2 * m + 1) ** 2 for m in range(101))
          and all(counts.cumulative[m] == comb(2 * m + 3, 3) for m in range(101))
          and elapsed < 5.0)
    assert criterion(1, ok, f"m<=100 exact, cumulative(100)={counts.total}, {elapsed:.2f}s incl. completion")


@pytest.mark.slow
def test_state_counts(criterion, gb4, gb5, gb6):
    found = {}
    for n, gb in ((4, gb4), (5, gb5), (6, gb6)):
        dfa = quotient_automaton(gb)
        found[n] = (dfa.num_states, dfa.finals == frozenset(range(dfa.num_states)), gb.terminated)
    ok = found == {4: (17, True, True), 5: (26, True, True), 6: (37, True, True)}
    assert criterion(2, ok, "states/all-final/terminated: " + ", ".join(f"n={n}: {v}" for n, v in found.items()))


@pytest.mark.slow
def test_growth_rates(criterion, gb5, gb6):
    rates, times = {}, {}
    for n, gb in ((5, gb5), (6, gb6)):
        dfa = quotient_automaton(gb)
        t0 = time.perf_counter()
        rates[n] = growth_rate(dfa)
        times[n] = time.perf_counter() - t0
    ok = (abs(rates[5] - 6.854) <= GROWTH_TOL and abs(rates[6] - 13.928) <= GROWTH_TOL
          and max(times.values()) < 1.0)
    assert criterion(3, ok, f"n=5 {rates[5]:.6f}, n=6 {rates[6]:.6f}, max {max(times.values()) * 1e3:.1f} ms")


def test_desk_scale_certification(criterion, dfa4):
    t0 = time.perf_counter()
    bad = []
    for m in range(13):
        cert = certify(m, dfa=dfa4)
        if not (cert.verdict == VERDICT_OK and cert.rank_lower_bound == cert.columns == comb(2 * m + 3, 3)):
            bad.append(m)
    elapsed = time.perf_counter() - t0
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
    ok = not bad and elapsed < 300 and peak < 8 * 2 ** 30
    assert criterion(4, ok, f"m=0..12 full rank, {elapsed:.1f}s total, peak RSS {peak / 2 ** 20:.0f} MiB"
                     + (f", failures at {bad}" if bad else ""))


def test_oracle_equivalence(criterion, model_M, dfa4):
    agree = []
    for m in range(7):
        mat = build_psi(model_M, dfa4, m)
        rank = exact_rank_oracle(mat, column_values(model_M, normal_words(dfa4, m), mat.radix))
        agree.append(rank == eliminate(mat) == mat.n_cols)
    rng = random.Random(2024)
    violations = 0
    for _ in range(100):
        rows, cols = rng.randint(3, 30), rng.randint(2, 25)
        columns = [sorted(rng.sample(range(rows), rng.randint(1, min(4, rows)))) for _ in range(cols)]
        values = [{r: rng.choice([-2, -1, 1, 2, 3]) for r in c} for c in columns]
        for _ in range(rng.randint(1, 3)):
            j = rng.randrange(len(columns))
            columns.append(columns[j])
            values.append({r: 2 * v for r, v in values[j].items()})
        mat = SparseMatrix.from_columns(columns)
        violations += eliminate(mat) > exact_rank_oracle(mat, values)
    ok = all(agree) and violations == 0
    assert criterion(5, ok, f"m<=6 oracle==bound==columns: {all(agree)}; random violations {violations}/100")


@pytest.mark.full_scale
@pytest.mark.skipif(not FULL_SCALE, reason="set MAGICCERT_FULL_SCALE=1 (hours, tens of GB)")
def test_full_scale(criterion, dfa4):
    cert = certify(50, dfa=dfa4)
    ok = cert.columns == cert.rank_lower_bound == 176851 and cert.verdict == VERDICT_OK
    assert criterion(6, ok, f"columns {cert.columns}, bound {cert.rank_lower_bound}, {cert.wall_seconds}s")


def test_full_scale_gate(criterion):
    if not FULL_SCALE:
        criterion(6, None, "m=50 run gated behind MAGICCERT_FULL_SCALE=1")


def test_separating_polynomials(criterion, gb4):
    t0 = time.perf_counter()
    R = build_R()
    x12 = Polynomial.from_word(monomial([(1, 2)], 4), 4)
    x12x24 = Polynomial.from_word(monomial([(1, 2), (2, 4)], 4), 4)
    ok = (not evaluate(x12, R) and not evaluate(x12x24, power(R, 2)) and bool(evaluate(x12x24, power(R, 3)))
          and bool(reduce(x12, gb4)) and bool(reduce(x12x24, gb4)))
    elapsed = time.perf_counter() - t0
    assert criterion(7, ok and elapsed < 1.0, f"exact checks in {elapsed * 1e3:.0f} ms")


def test_character_table(criterion):
    t0 = time.perf_counter()
    M = build_M()
    perms = set()
    all_permutations = True
    for a in assignments(3):
        mat = character_matrix(M, a)
        all_permutations &= all(sorted(r) == [0, 0, 0, 1] for r in mat)
        perms.add(matrix_to_permutation(mat))
    mismatched = []
    rows = [line.split() for line in CHARACTER_TABLE.strip().splitlines()]
    for name, bits in rows:
        a = tuple((int(bits[2 * i]), int(bits[2 * i + 1])) for i in range(3))
        if cycle_notation(matrix_to_permutation(character_matrix(M, a))) != name:
            mismatched.append(name)
    elapsed = time.perf_counter() - t0
    ok = all_permutations and len(perms) == 24 and len(rows) == 24 and not mismatched and elapsed < 1.0
    assert criterion(8, ok, f"{len(perms)} permutations from 64 characters, {24 - len(mismatched)}/24 rows match,"
                     f" {elapsed * 1e3:.0f} ms")


def test_nonzero_bound_and_scaling(criterion, model_M, dfa4):
    ms = [4, 6, 8, 10, 12]
    times, within = [], True
    for m in ms:
        best = math.inf
        for _ in range(2):
            t0 = time.perf_counter()
            mat = build_psi(model_M, dfa4, m)
            eliminate(mat)
            best = min(best, time.perf_counter() - t0)
        times.append(best)
        within &= mat.nonzeros <= (2 * m + 1) ** 3 * comb(2 * m + 3, 3)
    slope = np.polyfit(np.log(ms), np.log(times), 1)[0]
    ok = within and slope <= 6.5
    assert criterion(9, ok, f"N within bound: {within}; log-log slope {slope:.2f}")


@pytest.mark.slow
def test_dimension_gap(criterion, dfa4, gb5, gb6):
    m5 = dimension_gap(5, 3, 1, 1000, quotient_automaton(gb5))
    m6 = dimension_gap(6, 3, 1, 1000, quotient_automaton(gb6))
    m4 = dimension_gap(4, 3, 1, 10_000, dfa4)
    ok = m5 is not None and m6 is not None and m4 is None
    assert criterion(10, ok, f"k=3,l=1: n=5 crosses at {m5}, n=6 at {m6}, n=4 none up to 10^4")
