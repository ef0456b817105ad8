"""Decision procedures and proof objects.

Systems:
  CL9   — plain formulas, rules Wait/Choose/Switch/Match (component-deleting).
  CL9o  — hyperformulas, rules WaitC/ChooseC/SwitchC/MatchC (underline-moving,
          hybrid-atom introducing).
  CL10  — elementary-base fragment of CL9 without Match.
  CL10o — elementary-base fragment of CL9o without MatchC.
Refutations use the dual calculus (WaitBar/ChooseBar/SwitchBar); a formula in
the elementary-base fragment is refutable exactly when it is not provable.

Also provides the molecule lift/floor constructions translating general atoms
into choice-structured clusters of fresh elementary atoms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .formulas import (
    Atom, Cho, Const, Formula, FormulaError, Hybrid, Lit, Par, Seq,
    atom_names, fprint, is_balanced, is_elementary_base, is_plain, is_stable,
    iter_subformulas, negate, occ_flags, parse, rename_atom, replace_at,
    subformula_at,
)

CL9, CL9o, CL10, CL10o = "CL9", "CL9o", "CL10", "CL10o"
SYSTEMS = (CL9, CL9o, CL10, CL10o)

# rule tags
WAIT, CHOOSE, SWITCH, MATCH = "Wait", "Choose", "Switch", "Match"
WAIT_C, CHOOSE_C, SWITCH_C, MATCH_C = "WaitC", "ChooseC", "SwitchC", "MatchC"
WAIT_BAR, CHOOSE_BAR, SWITCH_BAR = "WaitBar", "ChooseBar", "SwitchBar"


@dataclass(frozen=True)
class RuleDetail:
    path: tuple = ()
    index: Optional[int] = None
    pos_path: Optional[tuple] = None
    neg_path: Optional[tuple] = None
    fresh: Optional[str] = None


@dataclass(frozen=True)
class ProofNode:
    conclusion: Formula
    rule: str
    detail: Optional[RuleDetail]
    premises: tuple

    def steps(self) -> int:
        return 1 + sum(p.steps() for p in self.premises)


RefutationNode = ProofNode  # same shape, Bar rule tags


def _is_circ_system(system: str) -> bool:
    return system in (CL9o, CL10o)


def _match_allowed(system: str) -> bool:
    return system in (CL9, CL9o)


def _usable(flags) -> bool:
    return flags.surface and flags.active


# ---------------------------------------------------------------------------
# termination measure

def measure(f: Formula) -> int:
    """Strictly decreases along every rule edge (in both calculi)."""
    total = 0
    for _, g in iter_subformulas(f):
        if isinstance(g, Cho):
            total += len(g.children)
        elif isinstance(g, Seq):
            total += len(g.children) - 1 - g.head
        elif isinstance(g, Lit) and isinstance(g.atom, Atom) and g.atom.is_general:
            total += 1
    return total


# ---------------------------------------------------------------------------
# rule expansions (conclusion -> premises, bottom-up)

def _seq_drop_head(g: Seq) -> Formula:
    tail = g.children[1:]
    if len(tail) == 1:
        return tail[0]
    return Seq(g.kind, tail, 0)


def choose_expansions(f: Formula, circ: bool = False) -> list[tuple[Formula, RuleDetail]]:
    out = []
    for path, g in iter_subformulas(f):
        if isinstance(g, Cho) and g.kind == "+" and _usable(occ_flags(f, path)):
            for i, c in enumerate(g.children):
                out.append((replace_at(f, path, c), RuleDetail(path=path, index=i)))
    return out


def switch_expansions(f: Formula, circ: bool = False) -> list[tuple[Formula, RuleDetail]]:
    out = []
    for path, g in iter_subformulas(f):
        if isinstance(g, Seq) and g.kind == "|>" and _usable(occ_flags(f, path)):
            if circ:
                if g.head < len(g.children) - 1:
                    out.append((replace_at(f, path, Seq(g.kind, g.children, g.head + 1)),
                                RuleDetail(path=path)))
            else:
                out.append((replace_at(f, path, _seq_drop_head(g)),
                            RuleDetail(path=path)))
    return out


def fresh_atom_name(f: Formula, extra: set[str] = frozenset()) -> str:
    used = atom_names(f) | set(extra)
    i = 1
    while f"m{i}" in used:
        i += 1
    return f"m{i}"


def match_expansions(f: Formula, circ: bool = False, root_names: set[str] = frozenset(),
                     fresh: Optional[str] = None) -> list[tuple[Formula, RuleDetail]]:
    if fresh is None:
        fresh = fresh_atom_name(f, set(root_names))
    pos: dict[str, list[tuple]] = {}
    neg: dict[str, list[tuple]] = {}
    for path, g in iter_subformulas(f):
        if (isinstance(g, Lit) and isinstance(g.atom, Atom) and g.atom.is_general
                and _usable(occ_flags(f, path))):
            (neg if g.neg else pos).setdefault(g.atom.name, []).append(path)
    out = []
    for name in sorted(set(pos) & set(neg)):
        for pp in pos[name]:
            for np in neg[name]:
                if circ:
                    plit = Lit(Hybrid(name, fresh), False)
                    nlit = Lit(Hybrid(name, fresh), True)
                else:
                    plit = Lit(Atom(fresh), False)
                    nlit = Lit(Atom(fresh), True)
                prem = replace_at(replace_at(f, pp, plit), np, nlit)
                out.append((prem, RuleDetail(pos_path=pp, neg_path=np, fresh=fresh)))
    return out


def wait_premises(f: Formula, circ: bool = False) -> list[Formula]:
    """Smallest premise set for the waiting rule (deduplicated, stable order)."""
    prems: list[Formula] = []
    for path, g in iter_subformulas(f):
        if not _usable(occ_flags(f, path)):
            continue
        if isinstance(g, Cho) and g.kind == "*":
            for c in g.children:
                prems.append(replace_at(f, path, c))
        elif isinstance(g, Seq) and g.kind == "&>":
            if circ:
                if g.head < len(g.children) - 1:
                    prems.append(replace_at(f, path, Seq(g.kind, g.children, g.head + 1)))
            else:
                prems.append(replace_at(f, path, _seq_drop_head(g)))
    seen, out = set(), []
    for p in prems:
        k = fprint(p)
        if k not in seen:
            seen.add(k)
            out.append(p)
    return out


def waitbar_premises(f: Formula) -> list[Formula]:
    """Dual waiting rule: all machine options (choice-disjunct selections and
    sequential-disjunction underline advances)."""
    prems: list[Formula] = []
    for path, g in iter_subformulas(f):
        if not _usable(occ_flags(f, path)):
            continue
        if isinstance(g, Cho) and g.kind == "+":
            for c in g.children:
                prems.append(replace_at(f, path, c))
        elif isinstance(g, Seq) and g.kind == "|>":
            if g.head < len(g.children) - 1:
                prems.append(replace_at(f, path, Seq(g.kind, g.children, g.head + 1)))
    seen, out = set(), []
    for p in prems:
        k = fprint(p)
        if k not in seen:
            seen.add(k)
            out.append(p)
    return out


# ---------------------------------------------------------------------------
# decision procedure

class _SearchStats:
    __slots__ = ("max_depth",)

    def __init__(self):
        self.max_depth = 0


SearchStats = _SearchStats


def _check_preconditions(f: Formula, system: str) -> None:
    if system in (CL9, CL10) and not is_plain(f):
        raise FormulaError(f"{system} requires a plain formula, got {fprint(f)}")
    if _is_circ_system(system) and not is_balanced(f):
        raise FormulaError(f"{system} requires a balanced hyperformula, got {fprint(f)}")
    if system in (CL10, CL10o) and not is_elementary_base(f):
        raise FormulaError(f"{system} requires an elementary-base formula, got {fprint(f)}")


def decide(f: Formula, system: str = CL9,
           memo: Optional[dict] = None,
           stats: Optional[_SearchStats] = None) -> Optional[ProofNode]:
    """Returns a checked proof of f in the given system, or None (unprovable).

    An external `memo` dict may be supplied to share work across many calls
    (e.g. corpus sweeps); keys are (system, canonical text).  A `stats`
    object, if given, receives the maximum recursion depth reached.
    """
    if system not in SYSTEMS:
        raise ValueError(f"unknown system {system!r}")
    _check_preconditions(f, system)
    circ = _is_circ_system(system)
    with_match = _match_allowed(system)
    if memo is None:
        memo = {}
    root_names = frozenset(atom_names(f))
    root_measure = measure(f)
    if stats is None:
        stats = _SearchStats()
    tags = (CHOOSE_C, SWITCH_C, MATCH_C, WAIT_C) if circ else (CHOOSE, SWITCH, MATCH, WAIT)

    def rec(g: Formula, bound: int, depth: int) -> Optional[ProofNode]:
        mg = measure(g)
        assert mg <= bound, "termination measure failed to decrease"
        assert depth <= root_measure + 1, "search depth exceeded the measure bound"
        stats.max_depth = max(stats.max_depth, depth)
        key = (system, fprint(g))
        if key in memo:
            return memo[key]
        result = None
        for prem, det in choose_expansions(g, circ):
            sub = rec(prem, mg - 1, depth + 1)
            if sub is not None:
                result = ProofNode(g, tags[0], det, (sub,))
                break
        if result is None:
            for prem, det in switch_expansions(g, circ):
                sub = rec(prem, mg - 1, depth + 1)
                if sub is not None:
                    result = ProofNode(g, tags[1], det, (sub,))
                    break
        if result is None and with_match:
            for prem, det in match_expansions(g, circ, root_names):
                sub = rec(prem, mg - 1, depth + 1)
                if sub is not None:
                    result = ProofNode(g, tags[2], det, (sub,))
                    break
        if result is None and is_stable(g):
            subs = []
            ok = True
            for prem in wait_premises(g, circ):
                sub = rec(prem, mg - 1, depth + 1)
                if sub is None:
                    ok = False
                    break
                subs.append(sub)
            if ok:
                result = ProofNode(g, tags[3], None, tuple(subs))
        memo[key] = result
        return result

    return rec(f, root_measure, 1)


# ---------------------------------------------------------------------------
# refutation search (dual calculus)

def refute(f: Formula, memo: Optional[dict] = None) -> Optional[RefutationNode]:
    """Returns a refutation of f (elementary-base), or None (irrefutable)."""
    if not is_elementary_base(f):
        raise FormulaError(f"refute requires an elementary-base formula, got {fprint(f)}")
    if memo is None:
        memo = {}
    root_measure = measure(f)

    def rec(g: Formula, bound: int, depth: int) -> Optional[RefutationNode]:
        mg = measure(g)
        assert mg <= bound, "termination measure failed to decrease"
        assert depth <= root_measure + 1, "search depth exceeded the measure bound"
        key = fprint(g)
        if key in memo:
            return memo[key]
        result = None
        for path, node in iter_subformulas(g):
            if not _usable(occ_flags(g, path)):
                continue
            if isinstance(node, Cho) and node.kind == "*":
                for i, c in enumerate(node.children):
                    sub = rec(replace_at(g, path, c), mg - 1, depth + 1)
                    if sub is not None:
                        result = ProofNode(g, CHOOSE_BAR,
                                           RuleDetail(path=path, index=i), (sub,))
                        break
            elif (isinstance(node, Seq) and node.kind == "&>"
                  and node.head < len(node.children) - 1):
                sub = rec(replace_at(g, path, Seq(node.kind, node.children, node.head + 1)),
                          mg - 1, depth + 1)
                if sub is not None:
                    result = ProofNode(g, SWITCH_BAR, RuleDetail(path=path), (sub,))
            if result is not None:
                break
        if result is None and not is_stable(g):
            subs = []
            ok = True
            for prem in waitbar_premises(g):
                sub = rec(prem, mg - 1, depth + 1)
                if sub is None:
                    ok = False
                    break
                subs.append(sub)
            if ok:
                result = ProofNode(g, WAIT_BAR, None, tuple(subs))
        memo[key] = result
        return result

    return rec(f, root_measure, 1)


# ---------------------------------------------------------------------------
# independent checker

def check_explain(p: ProofNode) -> Optional[str]:
    """None if the derivation is valid, else a message naming the failing node."""
    return _check(p, ())


def check(p: ProofNode) -> bool:
    return check_explain(p) is None


def _multiset(fs) -> dict:
    out: dict[str, int] = {}
    for g in fs:
        k = fprint(g)
        out[k] = out.get(k, 0) + 1
    return out


def _check(p: ProofNode, where: tuple) -> Optional[str]:
    f = p.conclusion
    circ = p.rule in (WAIT_C, CHOOSE_C, SWITCH_C, MATCH_C)
    err = None
    if p.rule in (WAIT, WAIT_C):
        if not is_stable(f):
            err = f"waiting rule on instable conclusion {fprint(f)}"
        elif _multiset(wait_premises(f, circ)) != _multiset(n.conclusion for n in p.premises):
            err = f"waiting rule premise set mismatch at {fprint(f)}"
    elif p.rule == WAIT_BAR:
        if is_stable(f):
            err = f"dual waiting rule on stable conclusion {fprint(f)}"
        elif _multiset(waitbar_premises(f)) != _multiset(n.conclusion for n in p.premises):
            err = f"dual waiting rule premise set mismatch at {fprint(f)}"
    elif p.rule in (CHOOSE, CHOOSE_C, CHOOSE_BAR):
        d = p.detail
        kind = "*" if p.rule == CHOOSE_BAR else "+"
        g = subformula_at(f, d.path) if d else None
        if (d is None or not isinstance(g, Cho) or g.kind != kind
                or d.index is None or not 0 <= d.index < len(g.children)
                or not _usable(occ_flags(f, d.path))
                or len(p.premises) != 1
                or p.premises[0].conclusion != replace_at(f, d.path, g.children[d.index])):
            err = f"bad choice step at {fprint(f)}"
    elif p.rule in (SWITCH, SWITCH_C, SWITCH_BAR):
        d = p.detail
        kind = "&>" if p.rule == SWITCH_BAR else "|>"
        g = subformula_at(f, d.path) if d else None
        ok = (d is not None and isinstance(g, Seq) and g.kind == kind
              and _usable(occ_flags(f, d.path)) and len(p.premises) == 1)
        if ok:
            if p.rule == SWITCH:
                expected = replace_at(f, d.path, _seq_drop_head(g))
            else:
                ok = g.head < len(g.children) - 1
                expected = (replace_at(f, d.path, Seq(g.kind, g.children, g.head + 1))
                            if ok else None)
        if not ok or p.premises[0].conclusion != expected:
            err = f"bad switch step at {fprint(f)}"
    elif p.rule in (MATCH, MATCH_C):
        d = p.detail
        ok = d is not None and d.pos_path is not None and d.neg_path is not None \
            and d.fresh is not None and len(p.premises) == 1
        if ok:
            gp = subformula_at(f, d.pos_path)
            gn = subformula_at(f, d.neg_path)
            ok = (isinstance(gp, Lit) and isinstance(gn, Lit)
                  and isinstance(gp.atom, Atom) and gp.atom == gn.atom
                  and gp.atom.is_general and not gp.neg and gn.neg
                  and _usable(occ_flags(f, d.pos_path))
                  and _usable(occ_flags(f, d.neg_path))
                  and d.fresh not in atom_names(f)
                  and d.fresh[0].islower())
        if ok:
            if p.rule == MATCH_C:
                plit = Lit(Hybrid(gp.atom.name, d.fresh), False)
                nlit = Lit(Hybrid(gp.atom.name, d.fresh), True)
            else:
                plit = Lit(Atom(d.fresh), False)
                nlit = Lit(Atom(d.fresh), True)
            expected = replace_at(replace_at(f, d.pos_path, plit), d.neg_path, nlit)
            ok = p.premises[0].conclusion == expected
        if not ok:
            err = f"bad match step at {fprint(f)}"
    else:
        err = f"unknown rule {p.rule!r}"
    if err is not None:
        return f"node {list(where)}: {err}"
    for i, sub in enumerate(p.premises):
        e = _check(sub, where + (i,))
        if e is not None:
            return e
    return None


# ---------------------------------------------------------------------------
# plain-proof -> circ-proof conversion

def circ_collapse(e: Formula) -> Formula:
    """The plain formula a hyperformula simulates: abandoned sequential
    components dropped, hybrids replaced by their elementary components."""
    if isinstance(e, Lit):
        if isinstance(e.atom, Hybrid):
            return Lit(Atom(e.atom.elementary), e.neg)
        return e
    if isinstance(e, Seq):
        tail = tuple(circ_collapse(c) for c in e.children[e.head:])
        if len(tail) == 1:
            return tail[0]
        return Seq(e.kind, tail, 0)
    if isinstance(e, (Par, Cho)):
        return type(e)(e.kind, tuple(circ_collapse(c) for c in e.children))
    return e


def _rename_proof(p: ProofNode, old: str, new: str) -> ProofNode:
    det = p.detail
    if det is not None and det.fresh == old:
        det = RuleDetail(det.path, det.index, det.pos_path, det.neg_path, new)
    return ProofNode(rename_atom(p.conclusion, old, new), p.rule, det,
                     tuple(_rename_proof(s, old, new) for s in p.premises))


def _proof_atom_names(p: ProofNode) -> set[str]:
    names = atom_names(p.conclusion)
    for s in p.premises:
        names |= _proof_atom_names(s)
    return names


def to_circ(p: ProofNode) -> ProofNode:
    """Convert a plain proof into an underline-moving proof of the same formula."""
    rule_map = {WAIT: WAIT_C, CHOOSE: CHOOSE_C, SWITCH: SWITCH_C, MATCH: MATCH_C}

    def conv(node: ProofNode, e: Formula) -> ProofNode:
        assert circ_collapse(e) == node.conclusion, \
            f"conversion invariant broken: {fprint(e)} vs {fprint(node.conclusion)}"
        if node.rule == WAIT:
            bytext: dict[str, list[Formula]] = {}
            for pe in wait_premises(e, circ=True):
                bytext.setdefault(fprint(circ_collapse(pe)), []).append(pe)
            subs = []
            for child in node.premises:
                k = fprint(child.conclusion)
                assert bytext.get(k), f"no matching circ wait premise for {k}"
                subs.append(conv(child, bytext[k].pop()))
            return ProofNode(e, WAIT_C, None, tuple(subs))
        child = node.premises[0]
        if node.rule == CHOOSE:
            cands = choose_expansions(e, circ=True)
        elif node.rule == SWITCH:
            cands = switch_expansions(e, circ=True)
        else:  # MATCH
            q = node.detail.fresh
            if q in atom_names(e):
                # the plain proof's fresh atom survives in an abandoned
                # component of e; rename the plain subtree consistently
                q2 = fresh_atom_name(e, _proof_atom_names(node))
                node = _rename_proof(node, q, q2)
                child = node.premises[0]
                q = q2
            cands = match_expansions(e, circ=True, fresh=q)
        for pe, det in cands:
            if circ_collapse(pe) == child.conclusion:
                return ProofNode(e, rule_map[node.rule], det, (conv(child, pe),))
        raise AssertionError(
            f"no circ expansion of {fprint(e)} matches {fprint(child.conclusion)}")

    return conv(p, p.conclusion)


# ---------------------------------------------------------------------------
# molecule lift / floor

@dataclass(frozen=True)
class MoleculeMap:
    m: int = 0
    names: dict = field(default_factory=dict)  # general name -> m x m name matrix


def _fresh_molecule_name(base: str, used: set[str]) -> str:
    name = base
    while name in used:
        name += "z"
    used.add(name)
    return name


def lift(f: Formula) -> tuple[Formula, MoleculeMap]:
    """Replace every general-atom occurrence by its large molecule."""
    count = sum(1 for _, g in iter_subformulas(f)
                if isinstance(g, Lit) and isinstance(g.atom, Atom) and g.atom.is_general)
    if count == 0:
        return f, MoleculeMap(0, {})
    m = max(2, count)
    used = set(atom_names(f))
    names: dict[str, list[list[str]]] = {}
    generals = sorted({g.atom.name for _, g in iter_subformulas(f)
                       if isinstance(g, Lit) and isinstance(g.atom, Atom)
                       and g.atom.is_general})
    for p in generals:
        names[p] = [[_fresh_molecule_name(f"{p.lower()}chk{a}x{b}", used)
                     for b in range(1, m + 1)] for a in range(1, m + 1)]

    def large(p: str) -> Formula:
        return Cho("*", tuple(
            Cho("+", tuple(Lit(Atom(nm)) for nm in row)) for row in names[p]))

    def go(g: Formula) -> Formula:
        if isinstance(g, Lit) and isinstance(g.atom, Atom) and g.atom.is_general:
            mol = large(g.atom.name)
            return negate(mol) if g.neg else mol
        if isinstance(g, (Par, Cho, Seq)):
            cs = tuple(go(c) for c in g.children)
            if isinstance(g, Seq):
                return Seq(g.kind, cs, g.head)
            return type(g)(g.kind, cs)
        return g

    return go(f), MoleculeMap(m, names)


def floor(e: Formula, mmap: MoleculeMap) -> Formula:
    """Collapse independent molecule occurrences back to their general atoms.

    Large and medium molecules are always collapsed; a small molecule only if
    it has exactly one independent occurrence in e (isolated)."""
    if mmap.m == 0:
        return e
    m = mmap.m
    patterns: list[tuple[Formula, tuple]] = []  # (pattern, (kind, P, a, b, negated))
    for p, matrix in mmap.names.items():
        lg = Cho("*", tuple(Cho("+", tuple(Lit(Atom(nm)) for nm in row))
                            for row in matrix))
        patterns.append((lg, ("large", p, 0, 0, False)))
        patterns.append((negate(lg), ("large", p, 0, 0, True)))
        for a in range(m):
            med = Cho("+", tuple(Lit(Atom(nm)) for nm in matrix[a]))
            patterns.append((med, ("medium", p, a, 0, False)))
            patterns.append((negate(med), ("medium", p, a, 0, True)))
        for a in range(m):
            for b in range(m):
                sm = Lit(Atom(matrix[a][b]))
                patterns.append((sm, ("small", p, a, b, False)))
                patterns.append((negate(sm), ("small", p, a, b, True)))

    found: list[tuple[tuple, tuple]] = []  # (path, info)

    def scan(g: Formula, path: tuple) -> None:
        for pat, info in patterns:
            if g == pat:
                found.append((path, info))
                return
        for i, c in enumerate(g.children) if isinstance(g, (Par, Cho, Seq)) else ():
            scan(c, path + (i,))

    scan(e, ())
    small_counts: dict[tuple, int] = {}
    for _, (kind, p, a, b, _neg) in found:
        if kind == "small":
            small_counts[(p, a, b)] = small_counts.get((p, a, b), 0) + 1
    out = e
    for path, (kind, p, a, b, negd) in found:
        if kind == "small" and small_counts[(p, a, b)] != 1:
            continue
        out = replace_at(out, path, Lit(Atom(p), negd))
    return out


# ---------------------------------------------------------------------------
# serialization

def detail_to_json(d: Optional[RuleDetail]) -> Optional[dict]:
    if d is None:
        return None
    out: dict = {}
    if d.pos_path is None:
        out["path"] = list(d.path)
    if d.index is not None:
        out["index"] = d.index
    if d.pos_path is not None:
        out["posPath"] = list(d.pos_path)
    if d.neg_path is not None:
        out["negPath"] = list(d.neg_path)
    if d.fresh is not None:
        out["fresh"] = d.fresh
    return out


def proof_to_json(p: ProofNode) -> dict:
    return {
        "formula": fprint(p.conclusion),
        "rule": p.rule,
        "detail": detail_to_json(p.detail),
        "premises": [proof_to_json(s) for s in p.premises],
    }


def proof_from_json(obj: dict) -> ProofNode:
    d = obj.get("detail")
    detail = None
    if d is not None:
        detail = RuleDetail(
            path=tuple(d.get("path", ())),
            index=d.get("index"),
            pos_path=tuple(d["posPath"]) if "posPath" in d else None,
            neg_path=tuple(d["negPath"]) if "negPath" in d else None,
            fresh=d.get("fresh"),
        )
    return ProofNode(
        conclusion=parse(obj["formula"]),
        rule=obj["rule"],
        detail=detail,
        premises=tuple(proof_from_json(s) for s in obj.get("premises", ())),
    )
