"""Finite constant games: legality, winners, projections, delays, manageability.

Move grammar (interpreted against the current game node):
    move := choiceIdx | parIdx "." move | "§" | "." move
A choice node consumes the whole remaining string as a 1-based index; a
parallel node consumes "i."; a sequential node consumes "§" (a switch by the
mover) or "." (routing into the mover's current component, i.e. the component
whose index equals the mover's switch count so far in that occurrence).

Runs are tuples of (player, move) with players "T" (machine) and "B"
(environment).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .formulas import (
    Atom, Cho, Const, Formula, Hybrid, Lit, Par, Seq, fprint,
    general_dehybridization, iter_subformulas, occ_flags, parse,
)

T, B = "T", "B"
SWITCH = "§"


def opp(p: str) -> str:
    return B if p == T else T


class RunError(ValueError):
    pass


# ---------------------------------------------------------------------------
# game trees


@dataclass(frozen=True)
class GElem:
    winner: str  # "T" or "B"


@dataclass(frozen=True)
class GCho:
    kind: str  # "*" (environment chooses) or "+" (machine chooses)
    children: tuple


@dataclass(frozen=True)
class GPar:
    kind: str  # "&" or "|"
    children: tuple


@dataclass(frozen=True)
class GSeq:
    kind: str  # "&>" or "|>"
    children: tuple


GameTree = Union[GElem, GCho, GPar, GSeq]

_G_DUAL = {"*": "+", "+": "*", "&": "|", "|": "&", "&>": "|>", "|>": "&>"}


def negate_game(g: GameTree) -> GameTree:
    if isinstance(g, GElem):
        return GElem(opp(g.winner))
    cs = tuple(negate_game(c) for c in g.children)
    return type(g)(_G_DUAL[g.kind], cs)


def game_size(g: GameTree) -> int:
    if isinstance(g, GElem):
        return 1
    return 1 + sum(game_size(c) for c in g.children)


# ---------------------------------------------------------------------------
# interpretations


@dataclass(frozen=True)
class Interpretation:
    elementary: dict = field(default_factory=dict)  # name -> "T"/"B"
    general: dict = field(default_factory=dict)     # name -> GameTree


def game_from_formula(f: Formula) -> GameTree:
    """Build a constant game from a formula over T/F leaves (used for the
    textual general-atom interpretation format)."""
    return interpret(f, Interpretation())


def interpret(f: Formula, i: Interpretation) -> GameTree:
    f = general_dehybridization(f)

    def go(g: Formula) -> GameTree:
        if isinstance(g, Const):
            return GElem(T if g.positive else B)
        if isinstance(g, Lit):
            assert isinstance(g.atom, Atom)
            if g.atom.is_general:
                if g.atom.name not in i.general:
                    raise RunError(f"no interpretation for general atom {g.atom.name}")
                tree = i.general[g.atom.name]
            else:
                if g.atom.name not in i.elementary:
                    raise RunError(f"no interpretation for elementary atom {g.atom.name}")
                tree = GElem(i.elementary[g.atom.name])
            return negate_game(tree) if g.neg else tree
        cs = tuple(go(c) for c in g.children)
        if isinstance(g, Par):
            return GPar(g.kind, cs)
        if isinstance(g, Cho):
            return GCho(g.kind, cs)
        return GSeq(g.kind, cs)

    return go(f)


# ---------------------------------------------------------------------------
# runs: text formats


def run_to_text(r: tuple) -> str:
    return " ".join(f"{p}:{m}" for p, m in r)


def run_from_text(text: str) -> tuple:
    out = []
    for tok in text.split():
        if len(tok) < 3 or tok[0] not in (T, B) or tok[1] != ":":
            raise RunError(f"bad run token {tok!r}")
        out.append((tok[0], tok[2:]))
    return tuple(out)


def run_from_json(items: list) -> tuple:
    out = []
    for it in items:
        if it.get("by") not in (T, B) or not isinstance(it.get("m"), str):
            raise RunError(f"bad run item {it!r}")
        out.append((it["by"], it["m"]))
    return tuple(out)


def run_to_json(r: tuple) -> list:
    return [{"by": p, "m": m} for p, m in r]


# ---------------------------------------------------------------------------
# degrees and projections


def degree(r: tuple, p: str) -> int:
    """Number of switch moves by p; requires a presequential run."""
    n = 0
    for pl, m in r:
        if m == SWITCH:
            if pl == p:
                n += 1
        elif not m.startswith("."):
            raise RunError(f"non-presequential move {m!r}")
    return n


def project(r: tuple, i: int) -> tuple:
    """The moves a sequential run makes in component i, prefixes stripped."""
    deg = {T: 0, B: 0}
    out = []
    for pl, m in r:
        if m == SWITCH:
            deg[pl] += 1
        elif m.startswith("."):
            if deg[pl] == i:
                out.append((pl, m[1:]))
        else:
            raise RunError(f"non-presequential move {m!r}")
    return tuple(out)


def _par_project(r: tuple, i: int) -> tuple:
    pre = f"{i + 1}."
    return tuple((pl, m[len(pre):]) for pl, m in r if m.startswith(pre))


def _cho_state(g: GCho, r: tuple):
    """(chosen child index or None, run inside the chosen child)."""
    if not r:
        return None, ()
    pl, m = r[0]
    idx = int(m) - 1
    return idx, r[1:]


# ---------------------------------------------------------------------------
# legality


def _move_ok(g: GameTree, pos: tuple, p: str, mv: str) -> bool:
    """Whether appending (p, mv) to the legal position pos keeps it legal."""
    if isinstance(g, GElem):
        return False
    if isinstance(g, GPar):
        for i in range(len(g.children)):
            pre = f"{i + 1}."
            if mv.startswith(pre):
                return _move_ok(g.children[i], _par_project(pos, i), p, mv[len(pre):])
        return False
    if isinstance(g, GCho):
        owner = B if g.kind == "*" else T
        idx, sub = _cho_state(g, pos)
        if idx is None:
            return (p == owner and mv.isdigit()
                    and 1 <= int(mv) <= len(g.children))
        return _move_ok(g.children[idx], sub, p, mv)
    # sequential
    n = len(g.children) - 1
    lead, chase = (B, T) if g.kind == "&>" else (T, B)
    if mv == SWITCH:
        if p == lead:
            return degree(pos, lead) + 1 <= n
        return degree(pos, chase) + 1 <= degree(pos, lead)
    if mv.startswith("."):
        k = degree(pos, p)
        return _move_ok(g.children[k], project(pos, k), p, mv[1:])
    return False


@dataclass(frozen=True)
class IllegalBy:
    player: str
    index: int


def legal(g: GameTree, r: tuple) -> Optional[IllegalBy]:
    """None if legal; otherwise the offending player and first bad move index."""
    for i, (p, m) in enumerate(r):
        if not _move_ok(g, r[:i], p, m):
            return IllegalBy(p, i)
    return None


def is_legal(g: GameTree, r: tuple) -> bool:
    return legal(g, r) is None


# ---------------------------------------------------------------------------
# winners


def winner(g: GameTree, r: tuple) -> str:
    bad = legal(g, r)
    if bad is not None:
        # the player who made the first illegal move loses
        return opp(bad.player)
    return _winner(g, r)


def _winner(g: GameTree, r: tuple) -> str:
    if isinstance(g, GElem):
        return g.winner
    if isinstance(g, GPar):
        ws = [_winner(c, _par_project(r, i)) for i, c in enumerate(g.children)]
        if g.kind == "&":
            return T if all(w == T for w in ws) else B
        return T if any(w == T for w in ws) else B
    if isinstance(g, GCho):
        idx, sub = _cho_state(g, r)
        if idx is None:
            # unresolved choice: the choosing player failed its obligation
            return T if g.kind == "*" else B
        return _winner(g.children[idx], sub)
    # sequential: the component of the leading player's final degree decides
    lead = B if g.kind == "&>" else T
    k = degree(r, lead)
    return _winner(g.children[k], project(r, k))


def finalize(g: GameTree, r: tuple) -> str:
    """Winner of the (legal) run r; exposed separately for the run-finalization
    invariants."""
    if legal(g, r) is not None:
        raise RunError("finalize requires a legal run")
    return _winner(g, r)


# ---------------------------------------------------------------------------
# legal move enumeration


def legal_moves(g: GameTree, r: tuple, p: str) -> set[str]:
    if isinstance(g, GElem):
        return set()
    if isinstance(g, GPar):
        out = set()
        for i, c in enumerate(g.children):
            out |= {f"{i + 1}.{m}" for m in legal_moves(c, _par_project(r, i), p)}
        return out
    if isinstance(g, GCho):
        owner = B if g.kind == "*" else T
        idx, sub = _cho_state(g, r)
        if idx is None:
            if p == owner:
                return {str(i + 1) for i in range(len(g.children))}
            return set()
        return legal_moves(g.children[idx], sub, p)
    n = len(g.children) - 1
    lead, chase = (B, T) if g.kind == "&>" else (T, B)
    out = set()
    if p == lead and degree(r, lead) + 1 <= n:
        out.add(SWITCH)
    if p == chase and degree(r, chase) + 1 <= degree(r, lead):
        out.add(SWITCH)
    k = degree(r, p)
    out |= {"." + m for m in legal_moves(g.children[k], project(r, k), p)}
    return out


# ---------------------------------------------------------------------------
# delay relation


def is_delay(sigma: tuple, gamma: tuple, p: str) -> bool:
    """sigma is a p-delay of gamma: same move subsequences per player, and
    every p-move of sigma arrives no earlier (relative to the other player's
    moves) than in gamma."""
    for pl in (T, B):
        if [m for q, m in sigma if q == pl] != [m for q, m in gamma if q == pl]:
            return False

    def opp_counts(run):
        # number of opponent moves preceding each p-move
        out, cnt = [], 0
        for q, _ in run:
            if q == p:
                out.append(cnt)
            else:
                cnt += 1
        return out

    return all(cg <= cs for cg, cs in zip(opp_counts(gamma), opp_counts(sigma)))


def negate_run(r: tuple) -> tuple:
    return tuple((opp(p), m) for p, m in r)


# ---------------------------------------------------------------------------
# run decomposition through a hyperformula and manageability


@dataclass
class RunDecomposition:
    choices: dict      # Cho path -> list of (player, index)
    switches: dict     # Seq path -> list of player
    atom_moves: dict   # Lit path -> list of (player, remainder)


def decompose_run(e: Formula, r: tuple) -> RunDecomposition:
    """Attribute every move of a run over interpret(dehybridize(e), i) to the
    occurrence of e it happens in."""
    choices: dict = {}
    switches: dict = {}
    atom_moves: dict = {}
    resolved: dict = {}
    seq_deg: dict = {}

    def route(node: Formula, path: tuple, p: str, mv: str) -> None:
        if isinstance(node, Lit):
            atom_moves.setdefault(path, []).append((p, mv))
            return
        if isinstance(node, Const):
            raise RunError(f"move {mv!r} inside a logical constant")
        if isinstance(node, Par):
            for i in range(len(node.children)):
                pre = f"{i + 1}."
                if mv.startswith(pre):
                    route(node.children[i], path + (i,), p, mv[len(pre):])
                    return
            raise RunError(f"unroutable move {mv!r} at parallel node")
        if isinstance(node, Cho):
            if path not in resolved:
                idx = int(mv) - 1
                choices.setdefault(path, []).append((p, idx))
                resolved[path] = idx
                return
            route(node.children[resolved[path]], path + (resolved[path],), p, mv)
            return
        # Seq
        if mv == SWITCH:
            switches.setdefault(path, []).append(p)
            seq_deg[(path, p)] = seq_deg.get((path, p), 0) + 1
            return
        if mv.startswith("."):
            k = seq_deg.get((path, p), 0)
            route(node.children[k], path + (k,), p, mv[1:])
            return
        raise RunError(f"unroutable move {mv!r} at sequential node")

    for p, mv in r:
        route(e, (), p, mv)
    return RunDecomposition(choices, switches, atom_moves)


def manageable(e: Formula, r: tuple, i: Interpretation) -> bool:
    """The five runtime conditions a proof-extracted machine maintains."""
    g = interpret(e, i)
    if legal(g, r) is not None:
        raise RunError("manageable requires a legal run")
    d = decompose_run(e, r)
    hybrid_occs: dict = {}
    for path, node in iter_subformulas(e):
        fl = occ_flags(e, path)
        if isinstance(node, Cho) and fl.active:
            # clause 1: no moves within active choice subformulas
            if any(q == path or q[:len(path)] == path
                   for q in list(d.choices) + list(d.switches) + list(d.atom_moves)):
                return False
        if isinstance(node, Seq) and fl.active:
            sw = d.switches.get(path, [])
            tcount = sum(1 for q in sw if q == T)
            bcount = sum(1 for q in sw if q == B)
            if node.kind == "&>":
                # clause 2: both players have switched exactly head times
                if tcount != node.head or bcount != node.head:
                    return False
            else:
                # clause 3: machine exactly head, environment at most head
                if tcount != node.head or bcount > node.head:
                    return False
        if isinstance(node, Lit):
            if isinstance(node.atom, Hybrid):
                hybrid_occs.setdefault(node.atom, []).append((path, node.neg, fl))
            elif node.atom.is_general:
                # clause 4: no machine moves within (non-hybrid) general atoms
                if any(q == T for q, _ in d.atom_moves.get(path, [])):
                    return False
    for hyb, occs in hybrid_occs.items():
        if len(occs) != 2 or not all(fl.active for _, _, fl in occs):
            continue
        pos = next(p for p, negd, _ in occs if not negd)
        neg = next(p for p, negd, _ in occs if negd)
        sigma_pos = tuple(d.atom_moves.get(pos, []))
        sigma_neg = tuple(d.atom_moves.get(neg, []))
        # clause 5: the positive occurrence's run is a machine-delay of the
        # negation of the negative occurrence's run
        if not is_delay(sigma_pos, negate_run(sigma_neg), T):
            return False
    return True
