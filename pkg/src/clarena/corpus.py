"""Size-bounded enumeration of canonical formulas for exhaustive testing.

Size measure: number of literal occurrences plus, for every n-ary connective
node, n-1 (each "application" costs one); negation is free.  Canonical form:
children of the commutative connectives are generated in sorted order only,
and same-operator nestings are excluded (the flattened n-ary node is the
canonical representative), which quotients out permutation/associativity
variants that all play-level properties are invariant under.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations_with_replacement, product

from .formulas import Atom, Cho, Const, Formula, Lit, Par, Seq, fprint

ALL_OPS = ("&", "|", "*", "+", "&>", "|>")
COMMUTATIVE = {"&", "|", "*", "+"}


def formula_size(f: Formula) -> int:
    if isinstance(f, (Lit, Const)):
        return 1
    return (len(f.children) - 1) + sum(formula_size(c) for c in f.children)


def _node(op: str, children: tuple) -> Formula:
    if op in ("&", "|"):
        return Par(op, children)
    if op in ("*", "+"):
        return Cho(op, children)
    return Seq(op, children, 0)


def _kind(f: Formula):
    return f.kind if isinstance(f, (Par, Cho, Seq)) else None


def _compositions(total: int, parts: int):
    """Ordered lists of `parts` positive integers summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_formulas(max_size: int, atoms: tuple, ops: tuple = ALL_OPS) -> list:
    """All canonical formulas of size <= max_size over the given atom names,
    in deterministic (size, text) order."""
    by_size: dict = {1: [Lit(Atom(a), neg) for a in atoms for neg in (False, True)]}
    for s in range(2, max_size + 1):
        out = []
        for op in ops:
            max_arity = s  # k children cost k-1 applications + k size-1 children
            for k in range(2, max_arity + 1):
                budget = s - (k - 1)
                if budget < k:
                    break
                if op in COMMUTATIVE:
                    # sorted multisets of children, no same-op child: split the
                    # size partition into groups of equal child size and pick a
                    # multiset from each group's candidates
                    for sizes in _compositions(budget, k):
                        if list(sizes) != sorted(sizes):
                            continue
                        groups: list = []
                        ok = True
                        for cs in sorted(set(sizes)):
                            cands = [c for c in by_size.get(cs, ())
                                     if _kind(c) != op]
                            if not cands:
                                ok = False
                                break
                            groups.append(combinations_with_replacement(
                                sorted(cands, key=fprint), sizes.count(cs)))
                        if not ok:
                            continue
                        for picks in product(*groups):
                            out.append(_node(op, tuple(
                                c for group in picks for c in group)))
                else:
                    for sizes in _compositions(budget, k):
                        choices = [[c for c in by_size.get(cs, ())
                                    if _kind(c) != op] for cs in sizes]
                        for combo in product(*choices):
                            out.append(_node(op, tuple(combo)))
        by_size[s] = out
    result = []
    for s in range(1, max_size + 1):
        result.extend(sorted(by_size.get(s, ()), key=fprint))
    return result


def general_occurrences(f: Formula) -> int:
    if isinstance(f, Lit):
        return 1 if (isinstance(f.atom, Atom) and f.atom.is_general) else 0
    if isinstance(f, Const):
        return 0
    return sum(general_occurrences(c) for c in f.children)
