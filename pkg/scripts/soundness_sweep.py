#!/usr/bin/env python3
"""Soundness sweep: extract a machine strategy from every provable corpus
formula and verify it wins exhaustively under the standard interpretations.

Usage: python3 scripts/soundness_sweep.py [--max-size 7] [--sample N] [--seed 0]
"""

import argparse
import random
import sys
import time

from clarena.corpus import enumerate_formulas
from clarena.formulas import atom_names, fprint, parse
from clarena.games import B, Interpretation, T, game_from_formula, interpret
from clarena.prover import CL9, decide, to_circ
from clarena.strategy import exhaustive_machine_wins

STANDARD_TREES = ("(T + F) * (F + T)", "T + F", "F * T", "(T * F) + (F * T)")
TREE_GAMES = [game_from_formula(parse(t)) for t in STANDARD_TREES]


def standard_interpretations(f):
    names = sorted(atom_names(f))
    gen_names = [n for n in names if n[0].isupper()]
    for k in range(8):
        yield Interpretation(
            elementary={n: (T if k < 4 else B) for n in names if n[0].islower()},
            general={n: TREE_GAMES[(k + j) % 4]
                     for j, n in enumerate(gen_names)})


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-size", type=int, default=7)
    ap.add_argument("--atoms", default="P,Q,p")
    ap.add_argument("--sample", type=int, default=0,
                    help="verify only N random provables (0 = all)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    atoms = tuple(a.strip() for a in args.atoms.split(","))

    t0 = time.time()
    memo: dict = {}
    corpus = enumerate_formulas(args.max_size, atoms)
    provables = [(f, p) for f in corpus
                 if (p := decide(f, CL9, memo)) is not None]
    print(f"{len(provables)} provable of {len(corpus)} "
          f"({time.time() - t0:.1f}s to decide)")
    if args.sample and args.sample < len(provables):
        provables = random.Random(args.seed).sample(provables, args.sample)

    t0 = time.time()
    losses = []
    for n, (f, p) in enumerate(provables, 1):
        pc = to_circ(p)
        for k, interp in enumerate(standard_interpretations(f)):
            g = interpret(f, interp)
            if not exhaustive_machine_wins(g, pc, interp, verify=(k == 0)):
                losses.append((fprint(f), k))
        if n % 1000 == 0:
            print(f"  {n}/{len(provables)} ({time.time() - t0:.0f}s)")
    print(f"verified {len(provables)} strategies x 8 interpretations "
          f"in {time.time() - t0:.1f}s; losses: {len(losses)}")
    for text, k in losses[:10]:
        print(f"  LOSS: {text} under interpretation #{k}")
    return 1 if losses else 0


if __name__ == "__main__":
    sys.exit(main())
