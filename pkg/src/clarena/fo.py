"""First-order formulas with choice quantifiers over sequential logic.

The language extends the propositional one with n-ary letters applied to
terms (variables or natural-number constants) and the choice quantifiers
`*x:G` (the environment picks a value for x) and `+x:G` (the machine picks).
Blind quantifiers are out of scope, which keeps stability decidable: the
elementarization is quantifier-free, so validity reduces to a tautology
check treating distinct atomic formulas as independent propositional letters.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .formulas import FormulaError

# variable names come from a reserved pool disjoint from atom letters
_VAR_RE = re.compile(r"^[vwxyz][0-9]*$")


def is_var_name(name: str) -> bool:
    return bool(_VAR_RE.match(name))


# ---------------------------------------------------------------------------
# terms and formulas


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Num:
    value: int


Term = "Var | Num"


def term_str(t) -> str:
    return t.name if isinstance(t, Var) else str(t.value)


@dataclass(frozen=True)
class FoAtom:
    letter: str
    args: tuple = ()

    @property
    def is_general(self) -> bool:
        return self.letter[0].isupper()


@dataclass(frozen=True)
class FLit:
    atom: FoAtom
    neg: bool = False


@dataclass(frozen=True)
class FPar:
    kind: str  # "&" or "|"
    children: tuple


@dataclass(frozen=True)
class FCho:
    kind: str  # "*" or "+"
    children: tuple


@dataclass(frozen=True)
class FSeq:
    kind: str  # "&>" or "|>"
    children: tuple


@dataclass(frozen=True)
class FQ:
    kind: str  # "*" (environment's choice) or "+" (machine's choice)
    var: str
    body: "FoFormula"


FoFormula = "FLit | FPar | FCho | FSeq | FQ"

_DUAL = {"&": "|", "|": "&", "*": "+", "+": "*", "&>": "|>", "|>": "&>"}


def negate_fo(f):
    if isinstance(f, FLit):
        return FLit(f.atom, not f.neg)
    if isinstance(f, FQ):
        return FQ(_DUAL[f.kind], f.var, negate_fo(f.body))
    cs = tuple(negate_fo(c) for c in f.children)
    return type(f)(_DUAL[f.kind], cs)


# ---------------------------------------------------------------------------
# parsing


_TOKEN_RE = re.compile(
    r"\s*(<->|->|&>|\|>|[~&|*+():,]|[A-Za-z][A-Za-z0-9]*|[0-9]+)")

_ALIASES = {
    "¬": "~", "∧": "&", "∨": "|", "⊓": "*", "⊔": "+",
    "△": "&>", "▽": "|>", "→": "->", "↔": "<->", "⊤": "T", "⊥": "F",
}


def _tokenize(text: str) -> list:
    for k, v in _ALIASES.items():
        text = text.replace(k, v)
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or not m.group(1):
            if text[pos:].strip():
                raise FormulaError(f"bad character at {text[pos:]!r}")
            break
        out.append(m.group(1))
        pos = m.end()
    return out


class _FoParser:
    def __init__(self, tokens: list):
        self.toks = tokens
        self.i = 0

    def peek(self) -> Optional[str]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expect: Optional[str] = None) -> str:
        if self.i >= len(self.toks):
            raise FormulaError("unexpected end of formula")
        tok = self.toks[self.i]
        if expect is not None and tok != expect:
            raise FormulaError(f"expected {expect!r}, found {tok!r}")
        self.i += 1
        return tok

    def formula(self):
        left = self.chain()
        nxt = self.peek()
        if nxt == "->":
            self.take()
            right = self.formula()
            return _flat_or(negate_fo(left), right)
        if nxt == "<->":
            self.take()
            right = self.formula()
            return FPar("&", (_flat_or(negate_fo(left), right),
                              _flat_or(negate_fo(right), left)))
        return left

    def chain(self):
        first = self.component(positive=True)
        op = self.peek()
        if op not in ("&", "|", "*", "+", "&>", "|>"):
            return first
        items = [first]
        while self.peek() == op:
            self.take()
            items.append(self.component(positive=True))
        cls = {"&": FPar, "|": FPar, "*": FCho, "+": FCho,
               "&>": FSeq, "|>": FSeq}[op]
        if self.peek() in ("&", "|", "*", "+", "&>", "|>"):
            raise FormulaError("mixed connective chain needs parentheses")
        return cls(op, tuple(items))

    def component(self, positive: bool):
        tok = self.peek()
        if tok == "~":
            self.take()
            return self.component(positive=not positive)
        if tok == "(":
            self.take()
            f = self.formula()
            self.take(")")
            return negate_fo(f) if not positive else f
        if tok in ("*", "+"):
            # quantifier prefix: *x:G / +x:G
            self.take()
            var = self.take()
            if not is_var_name(var):
                raise FormulaError(f"{var!r} is not a variable name")
            self.take(":")
            body = self.component(positive=True)
            q = FQ(tok, var, body)
            return negate_fo(q) if not positive else q
        return self.atom(positive)

    def atom(self, positive: bool):
        tok = self.take()
        if not tok[0].isalpha():
            raise FormulaError(f"expected an atom, found {tok!r}")
        if is_var_name(tok):
            raise FormulaError(f"variable {tok!r} used as an atom")
        args = []
        if self.peek() == "(":
            self.take()
            while True:
                args.append(self.term())
                if self.peek() == ",":
                    self.take()
                    continue
                break
            self.take(")")
        return FLit(FoAtom(tok, tuple(args)), neg=not positive)

    def term(self):
        tok = self.take()
        if tok.isdigit():
            return Num(int(tok))
        if is_var_name(tok):
            return Var(tok)
        raise FormulaError(f"bad term {tok!r}")


def _flat_or(a, b):
    parts = []
    for x in (a, b):
        if isinstance(x, FPar) and x.kind == "|":
            parts.extend(x.children)
        else:
            parts.append(x)
    return FPar("|", tuple(parts))


def _validate(f) -> None:
    arity: dict = {}
    bound: set = set()
    free: set = set()

    def walk(g, scope: tuple) -> None:
        if isinstance(g, FLit):
            a = g.atom
            if a.letter in arity and arity[a.letter] != len(a.args):
                raise FormulaError(f"inconsistent arity for {a.letter}")
            arity[a.letter] = len(a.args)
            for t in a.args:
                if isinstance(t, Var):
                    (bound if t.name in scope else free).add(t.name)
            return
        if isinstance(g, FQ):
            if g.var in scope:
                raise FormulaError(f"variable {g.var} bound twice")
            bound.add(g.var)
            walk(g.body, scope + (g.var,))
            return
        for c in g.children:
            walk(c, scope)

    walk(f, ())
    clash = bound & free
    if clash:
        raise FormulaError(f"variables both free and bound: {sorted(clash)}")


def parse_fo(text: str):
    p = _FoParser(_tokenize(text))
    f = p.formula()
    if p.peek() is not None:
        raise FormulaError(f"trailing input at {p.peek()!r}")
    _validate(f)
    return f


def print_fo(f) -> str:
    def p(g, top: bool) -> str:
        if isinstance(g, FLit):
            core = g.atom.letter
            if g.atom.args:
                core += "(" + ",".join(term_str(t) for t in g.atom.args) + ")"
            return ("~" if g.neg else "") + core
        if isinstance(g, FQ):
            return f"{g.kind}{g.var}:{p(g.body, False)}"
        body = f" {g.kind} ".join(p(c, False) for c in g.children)
        return body if top else f"({body})"

    return p(f, True)


# ---------------------------------------------------------------------------
# structural helpers


def children_fo(f) -> tuple:
    if isinstance(f, FLit):
        return ()
    if isinstance(f, FQ):
        return (f.body,)
    return f.children


def with_children_fo(f, cs: tuple):
    if isinstance(f, FQ):
        (body,) = cs
        return FQ(f.kind, f.var, body)
    return type(f)(f.kind, cs)


def subformula_at_fo(f, path: tuple):
    for i in path:
        f = children_fo(f)[i]
    return f


def replace_at_fo(f, path: tuple, g):
    if not path:
        return g
    cs = list(children_fo(f))
    cs[path[0]] = replace_at_fo(cs[path[0]], path[1:], g)
    return with_children_fo(f, tuple(cs))


def iter_surface(f, path: tuple = ()) -> Iterator:
    """Surface occurrences: not under a choice connective or quantifier, and
    not in the tail of a sequential subformula."""
    yield path, f
    if isinstance(f, (FLit, FCho, FQ)):
        return
    if isinstance(f, FSeq):
        yield from iter_surface(f.children[0], path + (0,))
        return
    for i, c in enumerate(f.children):
        yield from iter_surface(c, path + (i,))


def terms_of(f) -> set:
    out: set = set()

    def walk(g):
        if isinstance(g, FLit):
            out.update(g.atom.args)
            return
        for c in children_fo(g):
            walk(c)

    walk(f)
    return out


def bound_vars(f) -> set:
    out: set = set()

    def walk(g):
        if isinstance(g, FQ):
            out.add(g.var)
        for c in children_fo(g):
            walk(c)

    walk(f)
    return out


def var_names(f) -> set:
    names = {t.name for t in terms_of(f) if isinstance(t, Var)}
    return names | bound_vars(f)


def letters_of(f) -> set:
    out: set = set()

    def walk(g):
        if isinstance(g, FLit):
            out.add(g.atom.letter)
        for c in children_fo(g):
            walk(c)

    walk(f)
    return out


def substitute(f, var: str, t):
    """Capture-free substitution of a term for a free variable."""
    if isinstance(f, FLit):
        args = tuple(t if isinstance(a, Var) and a.name == var else a
                     for a in f.atom.args)
        return FLit(FoAtom(f.atom.letter, args), f.neg)
    if isinstance(f, FQ):
        if f.var == var:
            return f
        return FQ(f.kind, f.var, substitute(f.body, var, t))
    return with_children_fo(f, tuple(substitute(c, var, t)
                                     for c in children_fo(f)))


def rename_var(f, old: str, new: str):
    """Consistent renaming of a variable, bound occurrences included."""
    if isinstance(f, FLit):
        args = tuple(Var(new) if isinstance(a, Var) and a.name == old else a
                     for a in f.atom.args)
        return FLit(FoAtom(f.atom.letter, args), f.neg)
    if isinstance(f, FQ):
        v = new if f.var == old else f.var
        return FQ(f.kind, v, rename_var(f.body, old, new))
    return with_children_fo(f, tuple(rename_var(c, old, new)
                                     for c in children_fo(f)))


def fresh_var(f) -> str:
    used = var_names(f)
    for i in itertools.count(1):
        if f"y{i}" not in used:
            return f"y{i}"


def fresh_const(f):
    used = {t.value for t in terms_of(f) if isinstance(t, Num)}
    for i in itertools.count(0):
        if i not in used:
            return Num(i)


def fresh_letter(f) -> str:
    used = letters_of(f)
    for i in itertools.count(1):
        name = f"m{i}"
        if name not in used:
            return name


# ---------------------------------------------------------------------------
# elementarization and stability


def elementarize_fo(f):
    """Quantifier-free elementarization as (atom-keyed) truth conditions:
    returns a nested structure over {'atom': key, 'neg': b} / ('and'|'or',
    parts) / bool, with surface choice operators and general literals replaced
    by their fixed values and sequential operators by their head component."""

    def go(g):
        if isinstance(g, FLit):
            if g.atom.is_general:
                return False
            return ("lit", (g.atom.letter, g.atom.args), g.neg)
        if isinstance(g, FQ):
            return g.kind == "*"
        if isinstance(g, FCho):
            return g.kind == "*"
        if isinstance(g, FSeq):
            return go(g.children[0])
        op = "and" if g.kind == "&" else "or"
        return (op, tuple(go(c) for c in g.children))

    return go(f)


def _elem_atoms(e, out: set) -> None:
    if isinstance(e, bool):
        return
    if e[0] == "lit":
        out.add(e[1])
        return
    for part in e[1]:
        _elem_atoms(part, out)


def _elem_eval(e, val: dict) -> bool:
    if isinstance(e, bool):
        return e
    if e[0] == "lit":
        v = val[e[1]]
        return (not v) if e[2] else v
    if e[0] == "and":
        return all(_elem_eval(p, val) for p in e[1])
    return any(_elem_eval(p, val) for p in e[1])


def stable_fo(f) -> bool:
    """Distinct atomic formulas (letter + exact argument terms) behave as
    independent propositional letters; equality-free quantifier-free validity
    is exactly truth-table validity over them."""
    e = elementarize_fo(f)
    atoms: set = set()
    _elem_atoms(e, atoms)
    keys = sorted(atoms, key=repr)
    for bits in itertools.product([False, True], repeat=len(keys)):
        if not _elem_eval(e, dict(zip(keys, bits))):
            return False
    return True


# ---------------------------------------------------------------------------
# proof search


@dataclass(frozen=True)
class FoDetail:
    path: Optional[tuple] = None
    index: Optional[int] = None
    term: Optional[object] = None       # chosen term for +x
    var: Optional[str] = None           # fresh variable of a *x wait premise
    pos_path: Optional[tuple] = None
    neg_path: Optional[tuple] = None
    fresh: Optional[str] = None


@dataclass(frozen=True)
class FoProofNode:
    conclusion: object
    rule: str
    detail: Optional[FoDetail]
    premises: tuple = ()

    def steps(self) -> int:
        return 1 + sum(p.steps() for p in self.premises)


WAIT, CHOOSE, SWITCH, MATCH = "Wait", "Choose", "Switch", "Match"


def measure_fo(f) -> int:
    n = 0

    def walk(g):
        nonlocal n
        if isinstance(g, FLit):
            if g.atom.is_general:
                n += 1
            return
        if isinstance(g, FQ):
            n += 1
            walk(g.body)
            return
        if isinstance(g, FCho):
            n += len(g.children)
        if isinstance(g, FSeq):
            n += len(g.children) - 1
        for c in g.children:
            walk(c)

    walk(f)
    return n


def _seq_drop(g: FSeq):
    rest = g.children[1:]
    return rest[0] if len(rest) == 1 else FSeq(g.kind, rest)


def choose_expansions_fo(f) -> list:
    out = []
    for path, node in iter_surface(f):
        if isinstance(node, FCho) and node.kind == "+":
            for i, c in enumerate(node.children):
                out.append((replace_at_fo(f, path, c),
                            FoDetail(path=path, index=i)))
        elif isinstance(node, FQ) and node.kind == "+":
            bound = bound_vars(f)
            candidates = [t for t in sorted(terms_of(f), key=repr)
                          if not (isinstance(t, Var) and t.name in bound)]
            candidates.append(fresh_const(f))
            for t in candidates:
                prem = replace_at_fo(f, path, substitute(node.body, node.var, t))
                out.append((prem, FoDetail(path=path, term=t)))
    return out


def switch_expansions_fo(f) -> list:
    out = []
    for path, node in iter_surface(f):
        if isinstance(node, FSeq) and node.kind == "|>":
            out.append((replace_at_fo(f, path, _seq_drop(node)),
                        FoDetail(path=path)))
    return out


def match_expansions_fo(f, fresh: Optional[str] = None) -> list:
    pos: dict = {}
    neg: dict = {}
    for path, node in iter_surface(f):
        if isinstance(node, FLit) and node.atom.is_general:
            (neg if node.neg else pos).setdefault(node.atom.letter, []).append(path)
    out = []
    for letter in sorted(set(pos) & set(neg)):
        name = fresh or fresh_letter(f)
        for pp in pos[letter]:
            for np in neg[letter]:
                g = f
                for path in (pp, np):
                    lit = subformula_at_fo(f, path)
                    g = replace_at_fo(g, path,
                                      FLit(FoAtom(name, lit.atom.args), lit.neg))
                out.append((g, FoDetail(pos_path=pp, neg_path=np, fresh=name)))
    return out


def wait_premises_fo(f) -> list:
    """The smallest premise set for a waiting step, with canonical fresh
    variables; returns (premise, detail) pairs."""
    out = []
    for path, node in iter_surface(f):
        if isinstance(node, FCho) and node.kind == "*":
            for i, c in enumerate(node.children):
                out.append((replace_at_fo(f, path, c),
                            FoDetail(path=path, index=i)))
        elif isinstance(node, FSeq) and node.kind == "&>":
            out.append((replace_at_fo(f, path, _seq_drop(node)),
                        FoDetail(path=path)))
        elif isinstance(node, FQ) and node.kind == "*":
            y = fresh_var(f)
            prem = replace_at_fo(f, path, substitute(node.body, node.var, Var(y)))
            out.append((prem, FoDetail(path=path, var=y)))
    return out


def decide_fo(f, memo: Optional[dict] = None,
              _depth: int = 0, _bound: Optional[int] = None,
              stats=None) -> Optional[FoProofNode]:
    if memo is None:
        memo = {}
    if _bound is None:
        _bound = measure_fo(f) + 1
    assert _depth <= _bound, "search depth exceeded the termination measure"
    if stats is not None:
        stats.max_depth = max(stats.max_depth, _depth)
    key = print_fo(f)
    if key in memo:
        return memo[key]
    memo[key] = None  # cycle guard; measure strictly decreases so unreachable
    m = measure_fo(f)
    result = None

    def try_rule(rule, expansions):
        nonlocal result
        for prem, det in expansions:
            assert measure_fo(prem) < m, "rule application did not shrink the measure"
            sub = decide_fo(prem, memo, _depth + 1, _bound, stats)
            if sub is not None:
                result = FoProofNode(f, rule, det, (sub,))
                return True
        return False

    if (try_rule(CHOOSE, choose_expansions_fo(f))
            or try_rule(SWITCH, switch_expansions_fo(f))
            or try_rule(MATCH, match_expansions_fo(f))):
        memo[key] = result
        return result
    if stable_fo(f):
        prems = wait_premises_fo(f)
        subs = []
        for prem, det in prems:
            assert measure_fo(prem) < m
            sub = decide_fo(prem, memo, _depth + 1, _bound, stats)
            if sub is None:
                break
            subs.append(sub)
        else:
            result = FoProofNode(f, WAIT, None, tuple(subs))
    memo[key] = result
    return result


# ---------------------------------------------------------------------------
# proof checking


def check_fo_explain(p: FoProofNode) -> Optional[str]:
    return _check_fo(p, ())


def check_fo(p: FoProofNode) -> bool:
    return check_fo_explain(p) is None


def _premise_multiset(ps) -> dict:
    out: dict = {}
    for x in ps:
        k = print_fo(x)
        out[k] = out.get(k, 0) + 1
    return out


def _check_fo(p: FoProofNode, where: tuple) -> Optional[str]:
    f = p.conclusion
    loc = "/".join(map(str, where)) or "root"
    try:
        _validate(f)
    except FormulaError as exc:
        return f"{loc}: malformed conclusion: {exc}"
    if p.rule == WAIT:
        if not stable_fo(f):
            return f"{loc}: Wait on an instable formula"
        required = wait_premises_fo(f)
        given = list(p.premises)
        if len(given) != len(required):
            return f"{loc}: Wait premise count mismatch"
        used = [False] * len(given)
        for prem, det in required:
            found = False
            for j, sub in enumerate(given):
                if used[j]:
                    continue
                if det.var is not None:
                    # accept any fresh variable, not just the canonical one
                    node = subformula_at_fo(f, det.path)
                    ok = False
                    for y in sorted(var_names(sub.conclusion) - var_names(f)) + [det.var]:
                        cand = replace_at_fo(
                            f, det.path, substitute(node.body, node.var, Var(y)))
                        if print_fo(cand) == print_fo(sub.conclusion):
                            ok = True
                            break
                    if not ok:
                        continue
                elif print_fo(sub.conclusion) != print_fo(prem):
                    continue
                used[j] = found = True
                break
            if not found:
                return f"{loc}: missing Wait premise {print_fo(prem)}"
    elif p.rule in (CHOOSE, SWITCH, MATCH):
        if len(p.premises) != 1:
            return f"{loc}: {p.rule} needs exactly one premise"
        expansions = {CHOOSE: choose_expansions_fo,
                      SWITCH: switch_expansions_fo}.get(p.rule)
        if p.rule == MATCH:
            d = p.detail
            if d is None or d.fresh is None:
                return f"{loc}: Match lacks detail"
            if d.fresh in letters_of(f) or d.fresh[0].isupper() or is_var_name(d.fresh):
                return f"{loc}: Match letter {d.fresh} not a fresh elementary letter"
            cands = match_expansions_fo(f, fresh=d.fresh)
        else:
            cands = expansions(f)
        target = print_fo(p.premises[0].conclusion)
        if not any(print_fo(prem) == target for prem, _ in cands):
            return f"{loc}: premise is not a valid {p.rule} expansion"
    else:
        return f"{loc}: unknown rule {p.rule}"
    for i, sub in enumerate(p.premises):
        err = _check_fo(sub, where + (i,))
        if err is not None:
            return err
    return None


# ---------------------------------------------------------------------------
# serialization


def _term_json(t):
    return {"var": t.name} if isinstance(t, Var) else {"const": t.value}


def _term_from_json(obj):
    return Var(obj["var"]) if "var" in obj else Num(obj["const"])


def fo_detail_to_json(d: Optional[FoDetail]) -> Optional[dict]:
    if d is None:
        return None
    out: dict = {}
    if d.pos_path is not None:
        out.update(posPath=list(d.pos_path), negPath=list(d.neg_path),
                   fresh=d.fresh)
        return out
    if d.path is not None:
        out["path"] = list(d.path)
    if d.index is not None:
        out["index"] = d.index
    if d.term is not None:
        out["term"] = _term_json(d.term)
    if d.var is not None:
        out["var"] = d.var
    return out


def fo_detail_from_json(obj: Optional[dict]) -> Optional[FoDetail]:
    if obj is None:
        return None
    return FoDetail(
        path=tuple(obj["path"]) if "path" in obj else None,
        index=obj.get("index"),
        term=_term_from_json(obj["term"]) if "term" in obj else None,
        var=obj.get("var"),
        pos_path=tuple(obj["posPath"]) if "posPath" in obj else None,
        neg_path=tuple(obj["negPath"]) if "negPath" in obj else None,
        fresh=obj.get("fresh"))


def fo_proof_to_json(p: FoProofNode) -> dict:
    return {"formula": print_fo(p.conclusion), "rule": p.rule,
            "detail": fo_detail_to_json(p.detail),
            "premises": [fo_proof_to_json(s) for s in p.premises]}


def fo_proof_from_json(obj: dict) -> FoProofNode:
    return FoProofNode(
        parse_fo(obj["formula"]), obj["rule"],
        fo_detail_from_json(obj.get("detail")),
        tuple(fo_proof_from_json(s) for s in obj.get("premises", [])))
