"""Automaton sizes, growth rates and dimension-gap crossings for n = 4, 5, 6."""

import argparse
import math
import time

from magiccert.automaton import FiniteLanguage, count_by_length, growth_rate, quotient_automaton
from magiccert.certifier import dimension_gap
from magiccert.ncgroebner import magic_basis

# closed forms of the dominant roots
CLOSED_FORMS = {5: ((3 + math.sqrt(5)) / 2) ** 2, 6: (2 + math.sqrt(3)) ** 2}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, nargs="+", default=[2, 3, 4, 5, 6])
    parser.add_argument("--k", type=int, nargs="+", default=[1, 2, 3, 4, 6])
    parser.add_argument("--l", type=int, nargs="+", default=[1, 2])
    parser.add_argument("--cap", type=int, default=2000)
    args = parser.parse_args()

    print("n,rules,states,edges,counts_0..6,growth,closed_form,gb_seconds")
    autos = {}
    for n in args.n:
        t0 = time.perf_counter()
        gb = magic_basis(n)
        secs = time.perf_counter() - t0
        dfa = autos[n] = quotient_automaton(gb)
        try:
            rate = f"{growth_rate(dfa):.9f}"
        except FiniteLanguage:
            rate = "finite"
        counts = " ".join(map(str, count_by_length(dfa, 6).counts))
        closed = f"{CLOSED_FORMS[n]:.9f}" if n in CLOSED_FORMS else ""
        print(f"{n},{len(gb.rules)},{dfa.num_states},{dfa.num_edges},{counts},{rate},{closed},{secs:.2f}")

    print("\nn,k,l,first_crossing")
    for n in args.n:
        if n < 4:
            continue
        for k in args.k:
            for l in args.l:
                m = dimension_gap(n, k, l, args.cap, autos[n])
                print(f"{n},{k},{l},{'none' if m is None else m}")


if __name__ == "__main__":
    main()
