"""Formula / hyperformula ASTs, parser, printer, and structural operations.

Concrete syntax (ASCII canonical, UTF-8 aliases accepted on input):

    ~   negation            &   parallel conjunction     |   parallel disjunction
    *   choice conjunction  +   choice disjunction
    &>  sequential conjunction    |>  sequential disjunction
    ->  implication sugar (E -> F is parsed as ~E | F)
    T F logical atoms
    [G] underline marker on a component of a sequential chain
    P_q hybrid atom (general component P, elementary component q)

All binary operators require parentheses except same-operator chains (which are
flattened to one n-ary node) and `->` at lowest precedence; `~` binds tightest.
Elementary atom names begin lowercase, general names uppercase; alphanumeric only.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator, Union

PAR_AND, PAR_OR = "&", "|"
CHO_AND, CHO_OR = "*", "+"
SEQ_AND, SEQ_OR = "&>", "|>"

PAR_KINDS = (PAR_AND, PAR_OR)
CHO_KINDS = (CHO_AND, CHO_OR)
SEQ_KINDS = (SEQ_AND, SEQ_OR)

_DUAL = {
    PAR_AND: PAR_OR, PAR_OR: PAR_AND,
    CHO_AND: CHO_OR, CHO_OR: CHO_AND,
    SEQ_AND: SEQ_OR, SEQ_OR: SEQ_AND,
}


class FormulaError(ValueError):
    pass


@dataclass(frozen=True)
class Atom:
    name: str

    @property
    def is_general(self) -> bool:
        return self.name[0].isupper()

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Hybrid:
    general: str
    elementary: str

    def __str__(self) -> str:
        return f"{self.general}_{self.elementary}"


AtomLike = Union[Atom, Hybrid]


@dataclass(frozen=True)
class Const:
    positive: bool


@dataclass(frozen=True)
class Lit:
    atom: AtomLike
    neg: bool = False


@dataclass(frozen=True)
class Par:
    kind: str
    children: tuple

    def __post_init__(self):
        assert self.kind in PAR_KINDS and len(self.children) >= 2


@dataclass(frozen=True)
class Cho:
    kind: str
    children: tuple

    def __post_init__(self):
        assert self.kind in CHO_KINDS and len(self.children) >= 2


@dataclass(frozen=True)
class Seq:
    kind: str
    children: tuple
    head: int = 0

    def __post_init__(self):
        assert self.kind in SEQ_KINDS and len(self.children) >= 2
        assert 0 <= self.head < len(self.children)


Formula = Union[Const, Lit, Par, Cho, Seq]

TOP = Const(True)
BOT = Const(False)


# ---------------------------------------------------------------------------
# negation (pushed to literals; the connective-duality table)

def negate(f: Formula) -> Formula:
    if isinstance(f, Const):
        return Const(not f.positive)
    if isinstance(f, Lit):
        return Lit(f.atom, not f.neg)
    if isinstance(f, Par):
        return Par(_DUAL[f.kind], tuple(negate(c) for c in f.children))
    if isinstance(f, Cho):
        return Cho(_DUAL[f.kind], tuple(negate(c) for c in f.children))
    if isinstance(f, Seq):
        return Seq(_DUAL[f.kind], tuple(negate(c) for c in f.children), f.head)
    raise TypeError(f)


# ---------------------------------------------------------------------------
# parsing

_UNICODE_ALIASES = [
    ("¬", "~"), ("→", "->"), ("∧", "&"), ("∨", "|"),
    ("⊓", "*"), ("⊔", "+"), ("△", "&>"), ("▽", "|>"),
    ("⊤", "T"), ("⊥", "F"),
]

_TOKEN_RE = re.compile(
    r"(->|<->|&>|\|>|[~&|*+()\[\]]|[A-Za-z][A-Za-z0-9]*(?:_[A-Za-z][A-Za-z0-9]*)?|_)"
)

_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9]*\Z")


def _tokenize(text: str) -> list[tuple[str, int]]:
    for uni, ascii_ in _UNICODE_ALIASES:
        text = text.replace(uni, ascii_)
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise FormulaError(f"syntax error at position {pos}: {text[pos]!r}")
        tokens.append((m.group(0), pos))
        pos = m.end()
    return tokens


class _Parser:
    ops = {"&", "|", "*", "+", "&>", "|>"}

    def __init__(self, tokens, allow_iff=False):
        self.tokens = tokens
        self.i = 0
        self.allow_iff = allow_iff

    def peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def next(self):
        if self.i >= len(self.tokens):
            raise FormulaError("unexpected end of input")
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, t):
        tok, pos = self.next()
        if tok != t:
            raise FormulaError(f"expected {t!r} at position {pos}, got {tok!r}")

    def parse(self) -> Formula:
        f = self.impl()
        if self.i < len(self.tokens):
            tok, pos = self.tokens[self.i]
            raise FormulaError(f"trailing input at position {pos}: {tok!r}")
        return f

    def impl(self) -> Formula:
        left = self.chain()
        if self.peek() == "->":
            self.next()
            right = self.impl()
            return Par(PAR_OR, (negate(left), right))
        if self.peek() == "<->":
            if not self.allow_iff:
                raise FormulaError("'<->' is not part of the propositional syntax")
            self.next()
            right = self.impl()
            return Par(PAR_AND, (Par(PAR_OR, (negate(left), right)),
                                 Par(PAR_OR, (negate(right), left))))
        return left

    def chain(self) -> Formula:
        parts = [self.component()]
        op = None
        while self.peek() in self.ops:
            tok, pos = self.next()
            if op is None:
                op = tok
            elif tok != op:
                raise FormulaError(
                    f"mixed operators {op!r} and {tok!r} at position {pos} need parentheses")
            parts.append(self.component())
        marked = [i for i, (_, m) in enumerate(parts) if m]
        if op is None:
            if marked:
                raise FormulaError("underline bracket outside a sequential chain")
            return parts[0][0]
        children = tuple(p for p, _ in parts)
        if op in PAR_KINDS or op in CHO_KINDS:
            if marked:
                raise FormulaError("underline bracket on a non-sequential component")
            cls = Par if op in PAR_KINDS else Cho
            # flatten same-operator chains written without parentheses
            flat = []
            for c in children:
                flat.append(c)
            return cls(op, tuple(flat))
        if len(marked) > 1:
            raise FormulaError("more than one underlined component in a sequential chain")
        head = marked[0] if marked else 0
        return Seq(op, children, head)

    def component(self) -> tuple[Formula, bool]:
        if self.peek() == "[":
            self.next()
            f = self.unary()
            self.expect("]")
            return f, True
        return self.unary(), False

    def unary(self) -> Formula:
        tok, pos = self.next()
        if tok == "~":
            return negate(self.unary())
        if tok == "(":
            f = self.impl()
            self.expect(")")
            return f
        if tok == "T":
            return TOP
        if tok == "F":
            return BOT
        if tok == "[":
            raise FormulaError(f"underline bracket at position {pos} outside a sequential chain")
        if "_" in tok:
            gen, _, elem = tok.partition("_")
            if not (_IDENT_RE.match(gen) and gen[0].isupper()):
                raise FormulaError(f"bad hybrid general component {gen!r} at position {pos}")
            if not (_IDENT_RE.match(elem) and elem[0].islower()):
                raise FormulaError(f"bad hybrid elementary component {elem!r} at position {pos}")
            if gen in ("T",) or elem in ():
                raise FormulaError(f"reserved name in hybrid at position {pos}")
            return Lit(Hybrid(gen, elem))
        if _IDENT_RE.match(tok):
            return Lit(Atom(tok))
        raise FormulaError(f"unexpected token {tok!r} at position {pos}")


def parse(text: str, allow_iff: bool = False) -> Formula:
    return _Parser(_tokenize(text), allow_iff=allow_iff).parse()


# ---------------------------------------------------------------------------
# printing (canonical ASCII; parse(fprint(f)) == f)

def fprint(f: Formula) -> str:
    if isinstance(f, Const):
        return "T" if f.positive else "F"
    if isinstance(f, Lit):
        return ("~" if f.neg else "") + str(f.atom)
    parts = [fprint(c) for c in f.children]
    if isinstance(f, Seq) and f.head > 0:
        parts[f.head] = f"[{parts[f.head]}]"
    return "(" + f" {f.kind} ".join(parts) + ")"


# ---------------------------------------------------------------------------
# traversal helpers

def children_of(f: Formula) -> tuple:
    if isinstance(f, (Par, Cho, Seq)):
        return f.children
    return ()


def with_children(f: Formula, children: tuple) -> Formula:
    if isinstance(f, Par):
        return Par(f.kind, children)
    if isinstance(f, Cho):
        return Cho(f.kind, children)
    if isinstance(f, Seq):
        return Seq(f.kind, children, f.head)
    raise TypeError(f)


def subformula_at(f: Formula, path: tuple) -> Formula:
    for i in path:
        f = children_of(f)[i]
    return f


def replace_at(f: Formula, path: tuple, g: Formula) -> Formula:
    if not path:
        return g
    i, rest = path[0], path[1:]
    cs = list(children_of(f))
    cs[i] = replace_at(cs[i], rest, g)
    return with_children(f, tuple(cs))


def iter_subformulas(f: Formula, path: tuple = ()) -> Iterator[tuple[tuple, Formula]]:
    yield path, f
    for i, c in enumerate(children_of(f)):
        yield from iter_subformulas(c, path + (i,))


@dataclass(frozen=True)
class OccFlags:
    surface: bool
    active: bool
    abandoned: bool
    positive: bool


def occ_flags(f: Formula, path: tuple) -> OccFlags:
    """Occurrence classification in the hyperformula sense.

    surface: not under a choice connective and, within every sequential chain
    above it, sitting in the underlined component or to its left.
    active: within every sequential chain above it, sitting in the underlined
    component itself.
    abandoned: strictly left of the underline somewhere above.
    """
    surface = active = True
    abandoned = False
    node = f
    for i in path:
        if isinstance(node, Cho):
            surface = False
        elif isinstance(node, Seq):
            if i > node.head:
                surface = False
            if i != node.head:
                active = False
            if i < node.head:
                abandoned = True
        node = children_of(node)[i]
    positive = not (isinstance(node, Lit) and node.neg)
    return OccFlags(surface, active, abandoned, positive)


def classify_occurrences(f: Formula) -> list[tuple[tuple, OccFlags]]:
    return [(path, occ_flags(f, path)) for path, _ in iter_subformulas(f)]


# ---------------------------------------------------------------------------
# capitalization / elementarization / stability

def capitalize(f: Formula) -> Formula:
    """Replace every sequential subformula by its underlined component."""
    if isinstance(f, Seq):
        return capitalize(f.children[f.head])
    if isinstance(f, (Par, Cho)):
        return with_children(f, tuple(capitalize(c) for c in f.children))
    return f


def elementarize(f: Formula) -> Formula:
    """Capitalize, then map choice subformulas to T/F, general literals to F,
    hybrid literals to their elementary components."""
    def go(g: Formula) -> Formula:
        if isinstance(g, Const):
            return g
        if isinstance(g, Cho):
            return TOP if g.kind == CHO_AND else BOT
        if isinstance(g, Lit):
            if isinstance(g.atom, Hybrid):
                return Lit(Atom(g.atom.elementary), g.neg)
            if g.atom.is_general:
                # every literal occurrence of a general atom is a positive
                # occurrence of a general literal, so both P and ~P become F
                return BOT
            return g
        if isinstance(g, Par):
            return Par(g.kind, tuple(go(c) for c in g.children))
        raise TypeError(g)
    return go(capitalize(f))


def atom_names(f: Formula) -> set[str]:
    """All atom names occurring in f, including both components of hybrids."""
    names: set[str] = set()
    for _, g in iter_subformulas(f):
        if isinstance(g, Lit):
            if isinstance(g.atom, Hybrid):
                names.add(g.atom.general)
                names.add(g.atom.elementary)
            else:
                names.add(g.atom.name)
    return names


def eval_elementary(f: Formula, valuation: dict[str, bool]) -> bool:
    if isinstance(f, Const):
        return f.positive
    if isinstance(f, Lit):
        assert isinstance(f.atom, Atom) and not f.atom.is_general
        v = valuation.get(f.atom.name, False)
        return (not v) if f.neg else v
    if isinstance(f, Par):
        vals = (eval_elementary(c, valuation) for c in f.children)
        return all(vals) if f.kind == PAR_AND else any(vals)
    raise TypeError(f"not elementary: {f}")


def is_tautology(f: Formula) -> bool:
    names = sorted(atom_names(f))
    if len(names) > 20:
        raise FormulaError("too many atoms for truth-table stability check")
    for bits in itertools.product((False, True), repeat=len(names)):
        if not eval_elementary(f, dict(zip(names, bits))):
            return False
    return True


def falsifying_valuation(f: Formula) -> dict[str, bool] | None:
    names = sorted(atom_names(f))
    for bits in itertools.product((False, True), repeat=len(names)):
        val = dict(zip(names, bits))
        if not eval_elementary(f, val):
            return val
    return None


def is_stable(f: Formula) -> bool:
    return is_tautology(elementarize(f))


# ---------------------------------------------------------------------------
# hyperformula predicates

def is_plain(f: Formula) -> bool:
    for _, g in iter_subformulas(f):
        if isinstance(g, Lit) and isinstance(g.atom, Hybrid):
            return False
        if isinstance(g, Seq) and g.head != 0:
            return False
    return True


def is_elementary(f: Formula) -> bool:
    for _, g in iter_subformulas(f):
        if isinstance(g, (Cho, Seq)):
            return False
        if isinstance(g, Lit) and (isinstance(g.atom, Hybrid) or g.atom.is_general):
            return False
    return True


def is_elementary_base(f: Formula) -> bool:
    """No general or hybrid atoms (choice/sequential structure allowed)."""
    for _, g in iter_subformulas(f):
        if isinstance(g, Lit) and (isinstance(g.atom, Hybrid) or g.atom.is_general):
            return False
    return True


def is_balanced(f: Formula) -> bool:
    """Each hybrid occurs exactly twice (one positive, one negative, both
    surface) and its elementary component is used nowhere else."""
    occs: dict[Hybrid, list[tuple[tuple, Lit]]] = {}
    plain_elem_names: set[str] = set()
    for path, g in iter_subformulas(f):
        if isinstance(g, Lit):
            if isinstance(g.atom, Hybrid):
                occs.setdefault(g.atom, []).append((path, g))
            elif not g.atom.is_general:
                plain_elem_names.add(g.atom.name)
    for hyb, lits in occs.items():
        if len(lits) != 2:
            return False
        signs = sorted(l.neg for _, l in lits)
        if signs != [False, True]:
            return False
        for path, _ in lits:
            if not occ_flags(f, path).surface:
                return False
        if hyb.elementary in plain_elem_names:
            return False
        for other in occs:
            if other is not hyb and (other.elementary == hyb.elementary
                                     or other.general == hyb.elementary):
                return False
    return True


def general_dehybridization(f: Formula) -> Formula:
    """Hybrids to their general components; all underlines removed."""
    if isinstance(f, Lit) and isinstance(f.atom, Hybrid):
        return Lit(Atom(f.atom.general), f.neg)
    if isinstance(f, Seq):
        return Seq(f.kind, tuple(general_dehybridization(c) for c in f.children), 0)
    if isinstance(f, (Par, Cho)):
        return with_children(f, tuple(general_dehybridization(c) for c in f.children))
    return f


def rename_atom(f: Formula, old: str, new: str) -> Formula:
    """Rename every occurrence of an atom name (also inside hybrids)."""
    def ren(a: AtomLike) -> AtomLike:
        if isinstance(a, Atom):
            return Atom(new) if a.name == old else a
        g = new if a.general == old else a.general
        e = new if a.elementary == old else a.elementary
        return Hybrid(g, e)
    if isinstance(f, Lit):
        return Lit(ren(f.atom), f.neg)
    if isinstance(f, (Par, Cho, Seq)):
        return with_children(f, tuple(rename_atom(c, old, new) for c in f.children))
    return f
