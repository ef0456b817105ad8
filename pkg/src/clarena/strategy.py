"""Executable strategies extracted from proofs and refutations.

A machine strategy replays an underline-moving (CL9°-style) proof as a
reactive event loop over the interpreted game; an environment counterstrategy
replays a dual refutation.  Both maintain a live mirror of the root formula
tracking choice resolutions, per-player switch counts, and atom-subgame runs,
from which move addresses are computed.

The machine additionally tracks an internal position (omega_e) over the
current hyperformula's own game — the position the metatheory's invariants
speak about: active-choice moves are elided (the game itself steps into the
chosen component) while all other moves are retained — and asserts its
manageability after every reaction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .formulas import (
    Atom, Cho, Const, Formula, Hybrid, Lit, Par, Seq, atom_names,
    elementarize, falsifying_valuation, fprint, is_stable, iter_subformulas,
    occ_flags, replace_at, subformula_at,
)
from .games import (
    B, SWITCH, T, GameTree, Interpretation, RunError, game_size, interpret,
    is_delay, legal, legal_moves, manageable, winner,
)
from .prover import (
    CHOOSE_BAR, CHOOSE_C, MATCH_C, SWITCH_BAR, SWITCH_C, WAIT_BAR, WAIT_C,
    ProofNode, check, check_explain,
)

CIRC_RULES = {WAIT_C, CHOOSE_C, SWITCH_C, MATCH_C}
BAR_RULES = {WAIT_BAR, CHOOSE_BAR, SWITCH_BAR}


class StrategyError(Exception):
    pass


class AdversaryIllegal(StrategyError):
    """The adversary made an illegal move; per the game rules it has lost."""


# ---------------------------------------------------------------------------
# live tree


class LiveNode:
    __slots__ = ("kind", "children", "parent", "idx", "resolved", "sw", "run")

    def __init__(self, kind, children, parent, idx):
        self.kind = kind            # '&' '|' '*' '+' '&>' '|>' 'lit' 'const'
        self.children = children
        self.parent = parent
        self.idx = idx
        self.resolved = None        # Cho: (index, active: bool)
        self.sw = {T: 0, B: 0}      # Seq switch counts
        self.run = []               # Lit: [(player, remainder)]

    def clone(self, parent=None):
        n = LiveNode(self.kind, [], parent, self.idx)
        n.resolved = self.resolved
        n.sw = dict(self.sw)
        n.run = list(self.run)
        n.children = [c.clone(n) for c in self.children]
        return n


def build_live(f: Formula, parent=None, idx=0) -> LiveNode:
    if isinstance(f, Const):
        return LiveNode("const", [], parent, idx)
    if isinstance(f, Lit):
        return LiveNode("lit", [], parent, idx)
    node = LiveNode(f.kind, [], parent, idx)
    node.children = [build_live(c, node, i) for i, c in enumerate(f.children)]
    return node


def _spliced(n: LiveNode) -> bool:
    return n.kind in ("*", "+") and n.resolved is not None and n.resolved[1]


def _unwrap(n: LiveNode) -> LiveNode:
    while _spliced(n):
        n = n.children[n.resolved[0]]
    return n


def live_at(root: LiveNode, e_path: tuple) -> LiveNode:
    n = _unwrap(root)
    for i in e_path:
        n = _unwrap(n.children[i])
    return n


def e_path_of(n: LiveNode) -> tuple:
    parts = []
    while n.parent is not None:
        if not _spliced(n.parent):
            parts.append(n.idx)
        n = n.parent
    return tuple(reversed(parts))


def address_of(n: LiveNode) -> str:
    parts = []
    while n.parent is not None:
        p = n.parent
        if p.kind in ("&", "|"):
            parts.append(f"{n.idx + 1}.")
        elif p.kind in ("&>", "|>"):
            parts.append(".")
        n = p
    return "".join(reversed(parts))


@dataclass
class ChoiceEvent:
    node: LiveNode
    index: int


@dataclass
class SwitchEvent:
    node: LiveNode


@dataclass
class AtomEvent:
    node: LiveNode
    remainder: str


def route_move(root: LiveNode, p: str, mv: str):
    node = root
    while True:
        if node.kind in ("&", "|"):
            for i, c in enumerate(node.children):
                pre = f"{i + 1}."
                if mv.startswith(pre):
                    node, mv = c, mv[len(pre):]
                    break
            else:
                raise StrategyError(f"unroutable move {mv!r}")
        elif node.kind in ("*", "+"):
            if node.resolved is None:
                return ChoiceEvent(node, int(mv) - 1)
            node = node.children[node.resolved[0]]
        elif node.kind in ("&>", "|>"):
            if mv == SWITCH:
                return SwitchEvent(node)
            if not mv.startswith("."):
                raise StrategyError(f"unroutable move {mv!r}")
            node, mv = node.children[node.sw[p]], mv[1:]
        elif node.kind == "lit":
            return AtomEvent(node, mv)
        else:
            raise StrategyError(f"move {mv!r} inside a constant")


# ---------------------------------------------------------------------------
# machine strategy


class MachineStrategy:
    def __init__(self, proof: ProofNode, interp: Interpretation,
                 verify: bool = True, assert_invariants: bool = True):
        if verify:
            err = check_explain(proof)
            if err is not None:
                raise StrategyError(f"proof fails check: {err}")
        self._assert_rules(proof)
        self.interp = interp
        self.f0 = proof.conclusion
        self.g0 = interpret(self.f0, interp)
        self.root = build_live(self.f0)
        self.node = proof
        self.omega: list = []      # external run of the root game
        self.omega_e: list = []    # internal position of the current e's game
        self.assert_invariants = assert_invariants
        self.trace: list = []

    @staticmethod
    def _assert_rules(p: ProofNode) -> None:
        if p.rule not in CIRC_RULES:
            raise StrategyError(f"machine strategies need circ-rule proofs, got {p.rule}")
        for s in p.premises:
            MachineStrategy._assert_rules(s)

    def clone(self) -> "MachineStrategy":
        c = object.__new__(MachineStrategy)
        c.interp = self.interp
        c.f0 = self.f0
        c.g0 = self.g0
        c.root = self.root.clone()
        c.node = self.node
        c.omega = list(self.omega)
        c.omega_e = list(self.omega_e)
        c.assert_invariants = self.assert_invariants
        c.trace = list(self.trace)
        return c

    @property
    def e(self) -> Formula:
        return self.node.conclusion

    # -- emission -----------------------------------------------------------

    def _emit(self, mv: str, out: list, internal: bool) -> None:
        # address-map soundness: everything we emit must be legal right now
        if mv not in legal_moves(self.g0, tuple(self.omega), T):
            raise StrategyError(f"emitted illegal move {mv!r}")
        self.omega.append((T, mv))
        out.append(mv)
        if internal:
            self.omega_e.append((T, mv))

    def _check_invariants(self) -> None:
        if not self.assert_invariants:
            return
        if not manageable(self.e, tuple(self.omega_e), self.interp):
            raise StrategyError("manageability invariant violated")

    # -- proactive rules ----------------------------------------------------

    def _proactive(self, out: list) -> None:
        while True:
            rule = self.node.rule
            if rule == CHOOSE_C:
                d = self.node.detail
                live = live_at(self.root, d.path)
                self._emit(address_of(live) + str(d.index + 1), out, internal=False)
                live.resolved = (d.index, True)
                self.trace.append((rule, out[-1]))
                self.node = self.node.premises[0]
            elif rule == SWITCH_C:
                d = self.node.detail
                live = live_at(self.root, d.path)
                self._emit(address_of(live) + SWITCH, out, internal=True)
                live.sw[T] += 1
                self.trace.append((rule, out[-1]))
                self.node = self.node.premises[0]
            elif rule == MATCH_C:
                d = self.node.detail
                pos_live = live_at(self.root, d.pos_path)
                neg_live = live_at(self.root, d.neg_path)
                nus = [m for q, m in neg_live.run if q == B]
                pis = [m for q, m in pos_live.run if q == B]
                for m in nus:
                    self._emit(address_of(pos_live) + m, out, internal=True)
                    pos_live.run.append((T, m))
                    self.trace.append((rule, out[-1]))
                for m in pis:
                    self._emit(address_of(neg_live) + m, out, internal=True)
                    neg_live.run.append((T, m))
                    self.trace.append((rule, out[-1]))
                if not nus and not pis:
                    self.trace.append((rule, None))
                self.node = self.node.premises[0]
            else:
                break
        self._check_invariants()

    # -- reactive dispatch --------------------------------------------------

    def _descend_wait(self, target: Formula) -> None:
        if self.node.rule != WAIT_C:
            raise StrategyError(f"environment descent while cursor at {self.node.rule}")
        for prem in self.node.premises:
            if prem.conclusion == target:
                self.node = prem
                return
        raise StrategyError(f"no waiting premise matches {fprint(target)}")

    def _process_env(self, mv: str, out: list) -> None:
        if mv not in legal_moves(self.g0, tuple(self.omega), B):
            raise AdversaryIllegal(f"environment move {mv!r} is illegal")
        self.omega.append((B, mv))
        ev = route_move(self.root, B, mv)
        e = self.e
        if isinstance(ev, ChoiceEvent):
            path = e_path_of(ev.node)
            fl = occ_flags(e, path)
            if fl.active:
                # conjunct choice in an active occurrence: descend, the choice
                # move is consumed by the game stepping into the component
                sub = subformula_at(e, path)
                target = replace_at(e, path, sub.children[ev.index])
                ev.node.resolved = (ev.index, True)
                self.trace.append(("EnvChoice", mv))
                self._descend_wait(target)
            else:
                # abandoned-region choice: absorb
                ev.node.resolved = (ev.index, False)
                self.omega_e.append((B, mv))
                self.trace.append(("Absorb", mv))
        elif isinstance(ev, SwitchEvent):
            ev.node.sw[B] += 1
            self.omega_e.append((B, mv))
            path = e_path_of(ev.node)
            fl = occ_flags(e, path)
            sub = subformula_at(e, path)
            if ev.node.kind == "&>" and fl.active and ev.node.sw[B] == sub.head + 1:
                # leading switch: echo the catch-up switch, advance underline
                self._emit(address_of(ev.node) + SWITCH, out, internal=True)
                ev.node.sw[T] += 1
                self.trace.append(("CatchUp", out[-1]))
                target = replace_at(e, path, Seq(sub.kind, sub.children, sub.head + 1))
                self._descend_wait(target)
            else:
                # abandoned switch, or a trailing catch-up in a sequential
                # disjunction: absorb
                self.trace.append(("Absorb", mv))
        elif isinstance(ev, AtomEvent):
            ev.node.run.append((B, ev.remainder))
            self.omega_e.append((B, mv))
            path = e_path_of(ev.node)
            sub = subformula_at(e, path)
            fl = occ_flags(e, path)
            mirrored = False
            if (isinstance(sub, Lit) and isinstance(sub.atom, Hybrid) and fl.active):
                partner_path = next(
                    (q for q, g in iter_subformulas(e)
                     if q != path and isinstance(g, Lit) and g.atom == sub.atom), None)
                if partner_path is not None and occ_flags(e, partner_path).active:
                    partner = live_at(self.root, partner_path)
                    self._emit(address_of(partner) + ev.remainder, out, internal=True)
                    partner.run.append((T, ev.remainder))
                    self.trace.append(("Mirror", out[-1]))
                    mirrored = True
            if not mirrored:
                # abandoned occurrence, widowed hybrid, or an unmatched
                # general atom: absorb
                self.trace.append(("Absorb", mv))
        self._check_invariants()

    # -- public -------------------------------------------------------------

    def step(self, observed: list) -> list:
        out: list = []
        self._proactive(out)
        for mv in observed:
            self._process_env(mv, out)
            self._proactive(out)
        return out


def machine_from_proof(p: ProofNode, i: Interpretation, **kw) -> MachineStrategy:
    return MachineStrategy(p, i, **kw)


# ---------------------------------------------------------------------------
# environment counterstrategy


def default_interpretation(f: Formula) -> Interpretation:
    return Interpretation(elementary={n: B for n in atom_names(f)})


class EnvStrategy:
    def __init__(self, refutation: ProofNode, interp: Optional[Interpretation] = None,
                 verify: bool = True):
        if verify:
            err = check_explain(refutation)
            if err is not None:
                raise StrategyError(f"refutation fails check: {err}")
        self._assert_rules(refutation)
        self.f0 = refutation.conclusion
        # the legality structure of the game is interpretation-independent for
        # elementary-base formulas; any valuation works for move routing
        self.interp = interp or default_interpretation(self.f0)
        self.g0 = interpret(self.f0, self.interp)
        self.root = build_live(self.f0)
        self.node = refutation
        self.omega: list = []
        self.trace: list = []

    @staticmethod
    def _assert_rules(p: ProofNode) -> None:
        if p.rule not in BAR_RULES:
            raise StrategyError(f"counterstrategies need bar-rule refutations, got {p.rule}")
        for s in p.premises:
            EnvStrategy._assert_rules(s)

    def clone(self) -> "EnvStrategy":
        c = object.__new__(EnvStrategy)
        c.f0 = self.f0
        c.interp = self.interp
        c.g0 = self.g0
        c.root = self.root.clone()
        c.node = self.node
        c.omega = list(self.omega)
        c.trace = list(self.trace)
        return c

    @property
    def e(self) -> Formula:
        return self.node.conclusion

    @property
    def limit_formula(self) -> Formula:
        return self.node.conclusion

    def _emit(self, mv: str, out: list) -> None:
        if mv not in legal_moves(self.g0, tuple(self.omega), B):
            raise StrategyError(f"counterstrategy emitted illegal move {mv!r}")
        self.omega.append((B, mv))
        out.append(mv)

    def _proactive(self, out: list) -> None:
        while True:
            rule = self.node.rule
            if rule == CHOOSE_BAR:
                d = self.node.detail
                live = live_at(self.root, d.path)
                self._emit(address_of(live) + str(d.index + 1), out)
                live.resolved = (d.index, True)
                self.trace.append((rule, out[-1]))
                self.node = self.node.premises[0]
            elif rule == SWITCH_BAR:
                d = self.node.detail
                live = live_at(self.root, d.path)
                self._emit(address_of(live) + SWITCH, out)
                live.sw[B] += 1
                self.trace.append((rule, out[-1]))
                self.node = self.node.premises[0]
            else:
                break

    def _descend_waitbar(self, target: Formula) -> None:
        if self.node.rule != WAIT_BAR:
            raise StrategyError(f"machine descent while cursor at {self.node.rule}")
        for prem in self.node.premises:
            if prem.conclusion == target:
                self.node = prem
                return
        raise StrategyError(f"no dual waiting premise matches {fprint(target)}")

    def _process_machine(self, mv: str, out: list) -> None:
        if mv not in legal_moves(self.g0, tuple(self.omega), T):
            raise AdversaryIllegal(f"machine move {mv!r} is illegal")
        self.omega.append((T, mv))
        ev = route_move(self.root, T, mv)
        e = self.e
        if isinstance(ev, ChoiceEvent):
            path = e_path_of(ev.node)
            fl = occ_flags(e, path)
            if fl.active:
                sub = subformula_at(e, path)
                target = replace_at(e, path, sub.children[ev.index])
                ev.node.resolved = (ev.index, True)
                self.trace.append(("MachineChoice", mv))
                self._descend_waitbar(target)
            else:
                ev.node.resolved = (ev.index, False)
                self.trace.append(("Absorb", mv))
        elif isinstance(ev, SwitchEvent):
            ev.node.sw[T] += 1
            path = e_path_of(ev.node)
            fl = occ_flags(e, path)
            sub = subformula_at(e, path)
            if ev.node.kind == "|>" and fl.active and ev.node.sw[T] == sub.head + 1:
                # the machine led a switch in a sequential disjunction: the
                # environment catches up and the underline advances
                self._emit(address_of(ev.node) + SWITCH, out)
                ev.node.sw[B] += 1
                self.trace.append(("CatchUp", out[-1]))
                target = replace_at(e, path, Seq(sub.kind, sub.children, sub.head + 1))
                self._descend_waitbar(target)
            else:
                self.trace.append(("Absorb", mv))
        else:
            # elementary-base games have no atom subgames for the machine to
            # move in; a legal machine move can never land here
            raise StrategyError(f"unexpected atom move {mv!r} in elementary-base play")

    def step(self, observed: list) -> list:
        out: list = []
        self._proactive(out)
        for mv in observed:
            self._process_machine(mv, out)
            self._proactive(out)
        return out


def env_from_refutation(r: ProofNode, i: Optional[Interpretation] = None,
                        **kw) -> EnvStrategy:
    return EnvStrategy(r, i, **kw)


# ---------------------------------------------------------------------------
# simple adversaries


class NullAdversary:
    def __init__(self, *a, **kw):
        pass

    def step(self, observed: list) -> list:
        return []


class RandomAdversary:
    """Plays uniformly random legal moves, each turn emitting a geometric
    number of them (possibly none)."""

    def __init__(self, g: GameTree, player: str, seed: int, p_move: float = 0.5):
        self.g = g
        self.player = player
        self.rng = random.Random(seed)
        self.run: list = []
        self.p_move = p_move

    def step(self, observed: list) -> list:
        for mv in observed:
            self.run.append(("B" if self.player == T else "T", mv))
        out = []
        while self.rng.random() < self.p_move:
            opts = sorted(legal_moves(self.g, tuple(self.run), self.player))
            if not opts:
                break
            mv = self.rng.choice(opts)
            self.run.append((self.player, mv))
            out.append(mv)
        return out


class GreedyChooseAdversary:
    """Resolves one pending choice per turn (smallest address, first option);
    never switches."""

    def __init__(self, g: GameTree, player: str):
        self.g = g
        self.player = player
        self.run: list = []

    def step(self, observed: list) -> list:
        for mv in observed:
            self.run.append(("B" if self.player == T else "T", mv))
        opts = sorted(m for m in legal_moves(self.g, tuple(self.run), self.player)
                      if m[-1].isdigit())
        if not opts:
            return []
        self.run.append((self.player, opts[0]))
        return [opts[0]]


# ---------------------------------------------------------------------------
# play harness


@dataclass
class PlayResult:
    run: tuple
    winner: Optional[str]
    limit_formula: Optional[Formula]
    trace: list
    timed_out: bool = False


def play(g: GameTree, machine, env, cap: Optional[int] = None) -> PlayResult:
    """Interleave a machine-side and an environment-side reactor until
    quiescence; the machine is given the floor first after every exchange."""
    if cap is None:
        cap = 10 * game_size(g)
    run: list = []
    trace: list = []
    pending_m: list = []
    pending_e: list = []
    while True:
        t_moves = machine.step(pending_m)
        pending_m = []
        for mv in t_moves:
            run.append((T, mv))
            trace.append((T, mv))
            pending_e.append(mv)
        b_moves = env.step(pending_e)
        pending_e = []
        for mv in b_moves:
            run.append((B, mv))
            trace.append((B, mv))
            pending_m.append(mv)
        if not t_moves and not b_moves:
            break
        if len(run) > cap:
            return PlayResult(tuple(run), None, getattr(env, "limit_formula", None),
                              trace, timed_out=True)
    limit = getattr(env, "limit_formula", None)
    return PlayResult(tuple(run), winner(g, tuple(run)), limit, trace)


# ---------------------------------------------------------------------------
# exhaustive environment enumeration


def run_fingerprint(g: GameTree, r: tuple) -> tuple:
    """Canonical decomposition of a run: interleavings that differ only across
    independent components collapse to the same fingerprint."""
    from .games import GCho, GElem, GPar, _cho_state, _par_project, degree, project
    if isinstance(g, GElem):
        return tuple(r)
    if isinstance(g, GPar):
        return tuple(run_fingerprint(c, _par_project(r, i))
                     for i, c in enumerate(g.children))
    if isinstance(g, GCho):
        idx, sub = _cho_state(g, r)
        if idx is None:
            return (None,)
        return (idx, run_fingerprint(g.children[idx], sub))
    return (degree(r, T), degree(r, B),
            tuple(run_fingerprint(c, project(r, i)) for i, c in enumerate(g.children)))


def exhaustive_machine_wins(g: GameTree, p: ProofNode, i: Interpretation,
                            verify: bool = True) -> bool:
    """True iff the extracted machine beats every legal environment behavior."""
    try:
        base = MachineStrategy(p, i, verify=verify)
        base.step([])
    except StrategyError:
        return False
    seen: set = set()

    def rec(ms: MachineStrategy) -> bool:
        key = (id(ms.node), run_fingerprint(g, tuple(ms.omega)))
        if key in seen:
            return True
        seen.add(key)
        # the environment may stop at any point: the position must already be won
        if winner(g, tuple(ms.omega)) != T:
            return False
        for mv in sorted(legal_moves(g, tuple(ms.omega), B)):
            child = ms.clone()
            try:
                child.step([mv])
            except StrategyError:
                return False
            if not rec(child):
                return False
        return True

    return rec(base)


# ---------------------------------------------------------------------------
# post-hoc falsification


def post_hoc_falsify(limit: Formula) -> dict:
    """A valuation falsifying the elementarization of an instable limit formula."""
    if is_stable(limit):
        raise StrategyError("limit formula is stable; nothing to falsify")
    val = falsifying_valuation(elementarize(limit))
    assert val is not None
    return val


def valuation_to_interpretation(val: dict, f: Formula) -> Interpretation:
    elem = {n: B for n in atom_names(f)}
    elem.update({n: (T if v else B) for n, v in val.items()})
    return Interpretation(elementary=elem)
