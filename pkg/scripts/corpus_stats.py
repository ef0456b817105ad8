#!/usr/bin/env python3
"""Corpus statistics: canonical-formula counts and provability rates by size.

Usage: python3 scripts/corpus_stats.py [--max-size 7] [--atoms P,Q,p]
"""

import argparse
import time

from clarena.corpus import enumerate_formulas, formula_size, general_occurrences
from clarena.formulas import is_elementary_base
from clarena.prover import CL9, decide


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-size", type=int, default=7)
    ap.add_argument("--atoms", default="P,Q,p")
    args = ap.parse_args()
    atoms = tuple(a.strip() for a in args.atoms.split(","))

    t0 = time.time()
    corpus = enumerate_formulas(args.max_size, atoms)
    print(f"corpus: {len(corpus)} canonical formulas over {atoms} "
          f"(size <= {args.max_size}, {time.time() - t0:.1f}s)")
    print(f"  elementary-base: {sum(is_elementary_base(f) for f in corpus)}")
    print(f"  <=2 general occurrences: "
          f"{sum(general_occurrences(f) <= 2 for f in corpus)}")

    t0 = time.time()
    memo: dict = {}
    by_size: dict = {}
    for f in corpus:
        s = formula_size(f)
        total, prov = by_size.get(s, (0, 0))
        by_size[s] = (total + 1, prov + (decide(f, CL9, memo) is not None))
    print(f"provability by size ({time.time() - t0:.1f}s):")
    print(f"  {'size':>4} {'formulas':>9} {'provable':>9} {'rate':>7}")
    for s in sorted(by_size):
        total, prov = by_size[s]
        print(f"  {s:>4} {total:>9} {prov:>9} {prov / total:>7.2%}")


if __name__ == "__main__":
    main()
