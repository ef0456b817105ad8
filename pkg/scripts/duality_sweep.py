#!/usr/bin/env python3
"""Duality and conservativity sweeps over the elementary corpora.

Checks (a) that refutability coincides with unprovability on elementary-base
formulas, and (b) that provability coincides with classical tautology on
purely elementary (choice/sequential-free) formulas.

Usage: python3 scripts/duality_sweep.py [--max-size 7] [--elem-max-size 8]
"""

import argparse
import sys
import time

from clarena.corpus import enumerate_formulas
from clarena.formulas import fprint, is_tautology
from clarena.prover import CL9, CL10o, decide, refute


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-size", type=int, default=7)
    ap.add_argument("--elem-max-size", type=int, default=8)
    ap.add_argument("--atoms", default="p,q")
    args = ap.parse_args()
    atoms = tuple(a.strip() for a in args.atoms.split(","))

    t0 = time.time()
    corpus = enumerate_formulas(args.max_size, atoms)
    memo: dict = {}
    mismatches = [f for f in corpus
                  if (decide(f, CL10o, memo) is None) != (refute(f) is not None)]
    print(f"duality: {len(corpus)} formulas, {len(mismatches)} mismatches "
          f"({time.time() - t0:.1f}s)")
    for f in mismatches[:10]:
        print(f"  MISMATCH: {fprint(f)}")

    t0 = time.time()
    elem = enumerate_formulas(args.elem_max_size, atoms, ("&", "|"))
    memo = {}
    elem_mism = [f for f in elem
                 if (decide(f, CL9, memo) is not None) != is_tautology(f)]
    print(f"conservativity: {len(elem)} formulas, {len(elem_mism)} mismatches "
          f"({time.time() - t0:.1f}s)")
    for f in elem_mism[:10]:
        print(f"  MISMATCH: {fprint(f)}")
    return 1 if mismatches or elem_mism else 0


if __name__ == "__main__":
    sys.exit(main())
