"""Fraction-free sparse elimination over the integers.

Vectors are dictionaries ``key -> int``.  Each incoming vector is reduced
against the pivots found so far with ``v <- a*v - b*pivot`` (``a`` the pivot
entry, ``b`` the entry of ``v``) and then divided by its content, so entries
stay small and no fractions ever appear.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Tuple


def clear_denominators(v: Mapping[int, object]) -> Dict[int, int]:
    """Scale a rational vector to a primitive integer one."""
    fr = {k: Fraction(c) for k, c in v.items() if c}
    lcm = 1
    for c in fr.values():
        lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    return {k: int(c * lcm) for k, c in fr.items()}


def _content(values: Iterable[int]) -> int:
    g = 0
    for c in values:
        g = math.gcd(g, c)
        if g == 1:
            break
    return g


def _axpy(a: int, v: Dict[int, int], b: int, w: Mapping[int, int]) -> Dict[int, int]:
    out = {k: a * c for k, c in v.items()}
    for k, c in w.items():
        x = out.get(k, 0) - b * c
        if x:
            out[k] = x
        else:
            out.pop(k, None)
    return out


def integer_echelon(vectors: Iterable[Mapping[int, int]], track: bool = False,
                    stop_at_dependency: bool = False) -> Tuple[int, Optional[Dict[int, int]]]:
    """Rank of the span of ``vectors``.

    With ``track`` the reduction history is kept as integer coefficients over
    the input positions; the first vector that reduces to zero yields a
    dependency, returned as the second element (and ends the scan when
    ``stop_at_dependency`` is set).
    """
    pivots: Dict[int, Tuple[Dict[int, int], Optional[Dict[int, int]]]] = {}
    rank = 0
    found = None
    for idx, vec in enumerate(vectors):
        v = {k: int(c) for k, c in vec.items() if c}
        combo = {idx: 1} if track else None
        while v:
            key = min(v)
            piv = pivots.get(key)
            if piv is None:
                pivots[key] = (v, combo)
                rank += 1
                break
            pv, pcombo = piv
            a, b = pv[key], v[key]
            g = math.gcd(a, b)
            a, b = a // g, b // g
            v = _axpy(a, v, b, pv)
            if track:
                combo = _axpy(a, combo, b, pcombo)
                g = _content(list(v.values()) + list(combo.values()))
                combo = {k: c // g for k, c in combo.items()}
            else:
                g = _content(v.values())
            if g > 1:
                v = {k: c // g for k, c in v.items()}
        else:
            if track and found is None:
                found = combo
                if stop_at_dependency:
                    break
    return rank, found
