import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clarena.formulas import (
    Atom, Cho, Const, FormulaError, Hybrid, Lit, Par, Seq,
    atom_names, capitalize, classify_occurrences, elementarize,
    eval_elementary, falsifying_valuation, fprint, general_dehybridization,
    is_balanced, is_elementary, is_plain, is_stable, is_tautology,
    iter_subformulas, negate, occ_flags, parse, rename_atom, subformula_at,
)

P, Q = Lit(Atom("P")), Lit(Atom("Q"))
p, q = Lit(Atom("p")), Lit(Atom("q"))


def neg(f):
    return negate(f)


# ---------------------------------------------------------------------------
# parsing


def test_parse_implication_sugar():
    f = parse("(P + Q) -> (P |> Q)")
    assert f == Par("|", (Cho("*", (neg(P), neg(Q))), Seq("|>", (P, Q), 0)))


def test_parse_consts():
    assert parse("T") == Const(True)
    assert parse("F") == Const(False)


def test_parse_negation_pushed():
    assert parse("~(p &> q)") == Seq("|>", (neg(p), neg(q)), 0)
    assert parse("~(p * q)") == Cho("+", (neg(p), neg(q)))
    assert parse("~(p & q)") == Par("|", (neg(p), neg(q)))
    assert parse("~~p") == p


def test_parse_flattens_chains():
    assert parse("(p & q & p)") == Par("&", (p, q, p))
    assert parse("(p &> q &> p)") == Seq("&>", (p, q, p), 0)


def test_parse_underline():
    assert parse("(P &> [Q])") == Seq("&>", (P, Q), 1)
    assert parse("(P |> Q)") == Seq("|>", (P, Q), 0)


def test_parse_hybrid():
    assert parse("~P_q") == Lit(Hybrid("P", "q"), True)


def test_parse_unicode_aliases():
    assert parse("¬(p ⊓ q)") == parse("~(p * q)")
    assert parse("(p △ q) → (p ▽ q)") == parse("(p &> q) -> (p |> q)")


def test_parse_errors():
    for bad in ["(p & q | r)", "p &", "(p + [q])", "[p]", "(p_q + r)",
                "((p)", "p q", "(p &> [q] &> [r])", "x_Y", "~"]:
        with pytest.raises(FormulaError):
            parse(bad)


# ---------------------------------------------------------------------------
# printing round-trip


def test_print_examples():
    assert fprint(Seq("&>", (P, Q), 1)) == "(P &> [Q])"
    assert fprint(Cho("+", (P, Q))) == "(P + Q)"
    assert fprint(Lit(Hybrid("P", "q"), True)) == "~P_q"


names_elem = st.sampled_from(["p", "q", "r", "s"])
names_gen = st.sampled_from(["P", "Q", "R"])


@st.composite
def formulas(draw, max_depth=3, hybrids=False):
    if max_depth == 0:
        kind = draw(st.integers(0, 3 if hybrids else 2))
        negd = draw(st.booleans())
        if kind == 0:
            return Const(draw(st.booleans()))
        if kind == 1:
            return Lit(Atom(draw(names_elem)), negd)
        if kind == 2:
            return Lit(Atom(draw(names_gen)), negd)
        return Lit(Hybrid(draw(names_gen), draw(names_elem)), negd)
    op = draw(st.sampled_from(["&", "|", "*", "+", "&>", "|>", "leaf"]))
    if op == "leaf":
        return draw(formulas(max_depth=0, hybrids=hybrids))
    n = draw(st.integers(2, 3))
    cs = tuple(draw(formulas(max_depth=max_depth - 1, hybrids=hybrids))
               for _ in range(n))
    if op in ("&", "|"):
        return Par(op, cs)
    if op in ("*", "+"):
        return Cho(op, cs)
    head = draw(st.integers(0, n - 1))
    return Seq(op, cs, head)


@given(formulas(hybrids=True))
@settings(max_examples=200)
def test_parse_print_roundtrip(f):
    assert parse(fprint(f)) == f


@given(formulas(hybrids=True))
@settings(max_examples=200)
def test_negate_involution(f):
    assert negate(negate(f)) == f


# ---------------------------------------------------------------------------
# capitalize / elementarize / stability


def test_capitalize_examples():
    f = parse("(~P * ~Q) | (P |> Q)")
    assert capitalize(f) == Par("|", (Cho("*", (neg(P), neg(Q))), P))
    g = parse("((A &> [B]) & C)")
    assert capitalize(g) == Par("&", (Lit(Atom("B")), Lit(Atom("C"))))
    h = parse("(p | q)")
    assert capitalize(h) == h


def test_elementarize_examples():
    assert elementarize(parse("(~P * ~Q) | (P |> Q)")) == \
        Par("|", (Const(True), Const(False)))
    assert elementarize(parse("~q | q")) == Par("|", (neg(q), q))
    assert elementarize(parse("~P | (P |> Q)")) == \
        Par("|", (Const(False), Const(False)))


def test_elementarize_hybrid():
    assert elementarize(parse("~P_q | (P |> [Q_q])")) == Par("|", (neg(q), q))


def test_stability_examples():
    assert is_stable(parse("(~P * ~Q) | (P |> Q)"))
    assert not is_stable(parse("P | ~P"))
    assert is_stable(Const(True))
    assert not is_stable(parse("~P | (P |> Q)"))
    assert is_stable(parse("~p | (p |> Q)"))


@given(formulas(hybrids=True))
@settings(max_examples=200)
def test_elementarize_is_elementary(f):
    assert is_elementary(elementarize(f))


@given(formulas(hybrids=True))
@settings(max_examples=100)
def test_capitalize_idempotent_and_commutes(f):
    assert capitalize(capitalize(f)) == capitalize(f)
    assert elementarize(f) == elementarize(capitalize(f))


def _truth_table_taut(f):
    # independent oracle: direct recursive evaluation over all valuations
    names = sorted(atom_names(f))
    def ev(g, val):
        if isinstance(g, Const):
            return g.positive
        if isinstance(g, Lit):
            b = val[g.atom.name]
            return not b if g.neg else b
        bs = [ev(c, val) for c in g.children]
        return all(bs) if g.kind == "&" else any(bs)
    return all(ev(f, dict(zip(names, bits)))
               for bits in itertools.product([False, True], repeat=len(names)))


@given(formulas(max_depth=3))
@settings(max_examples=150)
def test_stability_matches_truth_table_on_elementary(f):
    if not is_elementary(f):
        return
    assert is_stable(f) == _truth_table_taut(f)
    fv = falsifying_valuation(f)
    if fv is None:
        assert _truth_table_taut(f)
    else:
        assert not eval_elementary(f, fv)


# ---------------------------------------------------------------------------
# occurrence classification


def test_classify_examples():
    f = parse("((A &> [B]) & C)")
    fl = occ_flags(f, (0, 0))  # the A occurrence
    assert fl.abandoned and fl.surface and not fl.active
    g = parse("(A + B)")
    assert not occ_flags(g, (0,)).surface
    h = parse("(A &> B)")  # head = 0
    fl = occ_flags(h, (1,))
    assert not fl.surface and not fl.active and not fl.abandoned


def test_classify_positive_flag():
    f = parse("(~P | Q)")
    assert not occ_flags(f, (0,)).positive
    assert occ_flags(f, (1,)).positive


def test_classify_covers_all_nodes():
    f = parse("((p * q) | (r &> [s]))")
    paths = {path for path, _ in classify_occurrences(f)}
    assert paths == {path for path, _ in iter_subformulas(f)}


# ---------------------------------------------------------------------------
# balance / dehybridization


def test_balanced_examples():
    assert is_balanced(parse("~P_q | P_q"))
    assert not is_balanced(parse("~P_q | P_q | q"))
    assert is_balanced(parse("(p + q) & (P |> Q)"))  # plain: vacuous
    assert not is_balanced(parse("P_q | P_q"))
    assert not is_balanced(parse("~P_q | (P_q + p)"))  # non-surface occurrence
    assert not is_balanced(parse("~P_q | P_q | ~Q_q | Q_q"))  # q reused


def test_general_dehybridization():
    f = parse("~P_q | ((A &> [B]) + q)")
    g = general_dehybridization(f)
    assert g == parse("~P | ((A &> B) + q)")
    assert is_plain(g)


@given(formulas(hybrids=True))
@settings(max_examples=100)
def test_dehybridization_plain(f):
    assert is_plain(general_dehybridization(f))


def test_rename_atom():
    f = parse("~P_q | q | (p * q)")
    assert rename_atom(f, "q", "m1") == parse("~P_m1 | m1 | (p * m1)")


def test_subformula_at():
    f = parse("((p * q) | r)")
    assert subformula_at(f, (0, 1)) == q
    assert subformula_at(f, ()) == f
