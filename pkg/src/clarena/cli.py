"""Command-line interface: decide/refute/verify/play/corpus/fuzz/serve.

Exit codes: 0 = positive result (provable / refutable / valid / machine win /
clean fuzz run), 1 = negative result, 2 = usage or input error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from .corpus import ALL_OPS, enumerate_formulas
from .formulas import FormulaError, fprint, parse
from .fo import (
    check_fo_explain, decide_fo, fo_proof_from_json, fo_proof_to_json,
    parse_fo, print_fo,
)
from .games import (
    B, GCho, GElem, GPar, GSeq, Interpretation, T, game_from_formula,
    interpret, is_delay, is_legal, legal, legal_moves, negate_game,
    negate_run, opp, winner,
)
from .prover import (
    CL9, CL10, check_explain, decide, proof_from_json, proof_to_json, refute,
    to_circ,
)
from .strategy import (
    AdversaryIllegal, MachineStrategy, RandomAdversary,
    exhaustive_machine_wins, play,
)


def _parse_or_die(text: str):
    try:
        return parse(text)
    except FormulaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(2)


def cmd_decide(args) -> int:
    if args.system == "cl11qf":
        try:
            f = parse_fo(args.formula)
        except FormulaError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        p = decide_fo(f)
        serial = fo_proof_to_json(p) if p else None
        shown = print_fo(f)
    else:
        f = _parse_or_die(args.formula)
        system = CL9 if args.system == "cl9" else CL10
        try:
            p = decide(f, system)
        except FormulaError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        serial = proof_to_json(p) if p else None
        shown = fprint(f)
    if p is None:
        print(f"unprovable: {shown}")
        return 1
    print(f"provable: {shown} ({p.steps()} steps)")
    if args.proof:
        with open(args.proof, "w", encoding="utf-8") as fh:
            json.dump(serial, fh, indent=2)
    return 0


def cmd_refute(args) -> int:
    f = _parse_or_die(args.formula)
    try:
        r = refute(f)
    except FormulaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if r is None:
        print(f"not refutable: {fprint(f)}")
        return 1
    print(f"refutable: {fprint(f)} ({r.steps()} steps)")
    if args.refutation:
        with open(args.refutation, "w", encoding="utf-8") as fh:
            json.dump(proof_to_json(r), fh, indent=2)
    return 0


def cmd_verify_proof(args) -> int:
    try:
        with open(args.path, encoding="utf-8") as fh:
            obj = json.load(fh)
        if args.system == "cl11qf":
            err = check_fo_explain(fo_proof_from_json(obj))
        else:
            err = check_explain(proof_from_json(obj))
    except (OSError, ValueError, KeyError, FormulaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if err is None:
        print("valid")
        return 0
    print(f"invalid: {err}")
    return 1


def _build_interp(f, spec_text):
    payload = json.loads(spec_text) if spec_text else {}
    from .service import build_interpretation

    return build_interpretation(f, payload)


class ScriptedAdversary:
    """Plays the scripted environment moves one per turn, stopping at the
    first exhausted or illegal entry (illegality is reported by the engine)."""

    def __init__(self, moves: list):
        self.moves = list(moves)

    def step(self, observed: list) -> list:
        return [self.moves.pop(0)] if self.moves else []


class InteractiveAdversary:
    def __init__(self, g, player):
        self.g = g
        self.player = player
        self.run: list = []

    def step(self, observed: list) -> list:
        for mv in observed:
            self.run.append((opp(self.player), mv))
            print(f"engine: {mv}")
        opts = sorted(legal_moves(self.g, tuple(self.run), self.player))
        if not opts:
            return []
        line = input(f"your move {opts} (empty to pass): ").strip()
        if not line:
            return []
        self.run.append((self.player, line))
        return [line]


def cmd_play(args) -> int:
    f = _parse_or_die(args.formula)
    try:
        interp = _build_interp(f, args.interp)
        proof = decide(f, CL9)
        if proof is None:
            print(f"error: {fprint(f)} is not provable; no machine strategy",
                  file=sys.stderr)
            return 2
        pc = to_circ(proof)
        g = interpret(f, interp)
        if args.env == "exhaustive":
            ok = exhaustive_machine_wins(g, pc, interp)
            if ok:
                print("machine wins all branches")
                return 0
            print("machine LOSES some branch")
            return 1
        if args.env.startswith("random:"):
            env = RandomAdversary(g, B, int(args.env.split(":", 1)[1]))
        elif args.env.startswith("scripted:"):
            with open(args.env.split(":", 1)[1], encoding="utf-8") as fh:
                env = ScriptedAdversary([ln.strip() for ln in fh if ln.strip()])
        elif args.env == "interactive":
            env = InteractiveAdversary(g, B)
        else:
            print(f"error: unknown --env {args.env}", file=sys.stderr)
            return 2
        ms = MachineStrategy(pc, interp)
        try:
            res = play(g, ms, env)
        except AdversaryIllegal as exc:
            print(f"environment made an illegal move ({exc}); machine wins")
            return 0
        from .games import run_to_text

        print(f"run: {run_to_text(res.run) or '(empty)'}")
        if res.timed_out:
            print("timed out (never a win)")
            return 1
        print(f"winner: {res.winner}")
        return 0 if res.winner == T else 1
    except (FormulaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def cmd_corpus(args) -> int:
    atoms = tuple(a.strip() for a in args.atoms.split(",") if a.strip())
    ops = tuple(o.strip() for o in args.ops.split(",")) if args.ops else ALL_OPS
    for f in enumerate_formulas(args.max_size, atoms, ops):
        print(fprint(f))
    return 0


# ---------------------------------------------------------------------------
# fuzz suites (seeded, mirror the property tests)


def _random_tree(rng, leaves=4):
    if leaves <= 1 or rng.random() < 0.35:
        return GElem(rng.choice([T, B]))
    k = rng.choice(["*", "+", "&", "|", "&>", "|>"])
    n = rng.randint(2, min(3, leaves))
    split = [leaves // n] * n
    cs = tuple(_random_tree(rng, max(1, s)) for s in split)
    cls = {"*": GCho, "+": GCho, "&": GPar, "|": GPar, "&>": GSeq, "|>": GSeq}
    return cls[k](k, cs)


def _all_runs(g, max_len):
    frontier, out = [()], [()]
    for _ in range(max_len):
        nxt = []
        for r in frontier:
            for p in (T, B):
                for m in legal_moves(g, r, p):
                    nxt.append(r + ((p, m),))
        out.extend(nxt)
        frontier = nxt
    return out


def _interleavings(tm, bm):
    if not tm:
        yield tuple((B, m) for m in bm)
        return
    if not bm:
        yield tuple((T, m) for m in tm)
        return
    for rest in _interleavings(tm[1:], bm):
        yield ((T, tm[0]),) + rest
    for rest in _interleavings(tm, bm[1:]):
        yield ((B, bm[0]),) + rest


def fuzz_demorgan(seed: int, trials: int) -> int:
    rng = random.Random(seed)
    bad = 0
    for _ in range(trials):
        g = _random_tree(rng)
        ng = negate_game(g)
        for r in _all_runs(g, 4)[:120]:
            if not is_legal(ng, negate_run(r)) or \
                    winner(ng, negate_run(r)) != opp(winner(g, r)):
                bad += 1
    return bad


def fuzz_static(seed: int, trials: int) -> int:
    rng = random.Random(seed)
    bad = 0
    for _ in range(trials):
        g = _random_tree(rng, leaves=3)
        for gamma in _all_runs(g, 4)[:60]:
            if len(gamma) > 5:
                continue
            p = winner(g, gamma)
            tm = [m for q, m in gamma if q == T]
            bm = [m for q, m in gamma if q == B]
            for sigma in _interleavings(tm, bm):
                if is_delay(sigma, gamma, p) and winner(g, sigma) != p:
                    bad += 1
    return bad


def fuzz_delay(seed: int, trials: int) -> int:
    rng = random.Random(seed)
    bad = 0
    for _ in range(trials):
        g = _random_tree(rng, leaves=3)
        for gamma in _all_runs(g, 3)[:40]:
            tm = [m for q, m in gamma if q == T]
            bm = [m for q, m in gamma if q == B]
            for sigma in _interleavings(tm, bm):
                for q in (T, B):
                    if not is_delay(sigma, gamma, q):
                        continue
                    bs, bg = legal(g, sigma), legal(g, gamma)
                    # illegality transfers along delays
                    if bs is not None and bs.player == q and \
                            not (bg is not None and bg.player == q):
                        bad += 1
                    if bg is not None and bg.player == opp(q) and \
                            not (bs is not None and bs.player == opp(q)):
                        bad += 1
    return bad


def cmd_fuzz(args) -> int:
    suites = {"demorgan": fuzz_demorgan, "static": fuzz_static,
              "delay": fuzz_delay}
    fn = suites.get(args.suite)
    if fn is None:
        print(f"error: unknown suite {args.suite}", file=sys.stderr)
        return 2
    bad = fn(args.seed, args.trials)
    print(f"{args.suite}: {bad} violations in {args.trials} trials")
    return 0 if bad == 0 else 1


def cmd_serve(args) -> int:
    from .service import main as serve_main

    serve_main(args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="clarena")
    sub = ap.add_subparsers(dest="cmd", required=True)

    d = sub.add_parser("decide", help="decide provability")
    d.add_argument("formula")
    d.add_argument("--system", choices=["cl9", "cl10", "cl11qf"], default="cl9")
    d.add_argument("--proof", help="write the proof JSON here")
    d.set_defaults(fn=cmd_decide)

    r = sub.add_parser("refute", help="search for a refutation")
    r.add_argument("formula")
    r.add_argument("--refutation", help="write the refutation JSON here")
    r.set_defaults(fn=cmd_refute)

    v = sub.add_parser("verify-proof", help="check a serialized proof")
    v.add_argument("path")
    v.add_argument("--system", choices=["cl9", "cl11qf"], default="cl9")
    v.set_defaults(fn=cmd_verify_proof)

    p = sub.add_parser("play", help="play the extracted machine strategy")
    p.add_argument("formula")
    p.add_argument("--env", default="exhaustive",
                   help="exhaustive | random:SEED | scripted:FILE | interactive")
    p.add_argument("--interp", help="interpretation JSON")
    p.set_defaults(fn=cmd_play)

    c = sub.add_parser("corpus", help="enumerate canonical formulas")
    c.add_argument("--max-size", type=int, required=True)
    c.add_argument("--atoms", required=True)
    c.add_argument("--ops", help="comma-separated connective subset")
    c.set_defaults(fn=cmd_corpus)

    z = sub.add_parser("fuzz", help="run a game-engine property suite")
    z.add_argument("--suite", required=True,
                   help="demorgan | static | delay")
    z.add_argument("--seed", type=int, default=0)
    z.add_argument("--trials", type=int, default=200)
    z.set_defaults(fn=cmd_fuzz)

    s = sub.add_parser("serve", help="run the HTTP session service")
    s.add_argument("--port", type=int, default=None)
    s.set_defaults(fn=cmd_serve)
    return ap


def main(argv=None) -> None:
    args = build_parser().parse_args(argv)
    sys.exit(args.fn(args))


if __name__ == "__main__":
    main()
