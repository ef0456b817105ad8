#!/usr/bin/env python3
"""Completeness sweep: for every unprovable elementary-base corpus formula,
play the extracted counterstrategy against a family of adversary machines and
check that the machine loses under the post-hoc falsifying interpretation.

Usage: python3 scripts/completeness_sweep.py [--max-size 7] [--seeds 10]
"""

import argparse
import sys
import time

from clarena.corpus import enumerate_formulas
from clarena.formulas import fprint, is_elementary_base, is_stable
from clarena.games import B, T, interpret, winner
from clarena.prover import CL10, decide, refute
from clarena.strategy import (
    GreedyChooseAdversary, NullAdversary, RandomAdversary,
    default_interpretation, env_from_refutation, play, post_hoc_falsify,
    valuation_to_interpretation,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-size", type=int, default=7)
    ap.add_argument("--atoms", default="p")
    ap.add_argument("--seeds", type=int, default=10,
                    help="number of seeded random adversaries")
    args = ap.parse_args()
    atoms = tuple(a.strip() for a in args.atoms.split(","))

    memo: dict = {}
    corpus = [f for f in enumerate_formulas(args.max_size, atoms)
              if is_elementary_base(f)]
    unprovable = [f for f in corpus if decide(f, CL10, memo) is None]
    print(f"{len(unprovable)} unprovable of {len(corpus)} elementary-base")

    t0 = time.time()
    failures = []
    for f in unprovable:
        r = refute(f)
        if r is None:
            failures.append((fprint(f), "-", "unprovable but not refutable"))
            continue
        i = default_interpretation(f)
        g = interpret(f, i)
        adversaries = ([NullAdversary()]
                       + [RandomAdversary(g, T, s) for s in range(args.seeds)]
                       + [GreedyChooseAdversary(g, T)])
        for k, adv in enumerate(adversaries):
            res = play(g, adv, env_from_refutation(r, i))
            if res.timed_out or is_stable(res.limit_formula):
                failures.append((fprint(f), k, "no instable limit"))
                continue
            val = post_hoc_falsify(res.limit_formula)
            gi = interpret(f, valuation_to_interpretation(val, f))
            if winner(gi, res.run) != B:
                failures.append((fprint(f), k, "machine won anyway"))
    n_adv = args.seeds + 2
    print(f"played {len(unprovable)} x {n_adv} adversaries in "
          f"{time.time() - t0:.1f}s; failures: {len(failures)}")
    for text, k, why in failures[:10]:
        print(f"  FAIL: {text} (adversary {k}): {why}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
