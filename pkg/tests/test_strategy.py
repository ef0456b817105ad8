"""Strategy extraction tests: proof replay, copycat, counterstrategies."""

import dataclasses

import pytest

from clarena.formulas import fprint, parse
from clarena.games import (
    B, Interpretation, T, game_from_formula, interpret, winner,
)
from clarena.prover import CL9, CL10, decide, refute, to_circ
from clarena.strategy import (
    AdversaryIllegal, EnvStrategy, GreedyChooseAdversary, MachineStrategy,
    NullAdversary, RandomAdversary, StrategyError, default_interpretation,
    env_from_refutation, exhaustive_machine_wins, machine_from_proof, play,
    post_hoc_falsify, valuation_to_interpretation,
)

PQ_TREE = "(T + F) * (F + T)"


def std_interp(**elem):
    return Interpretation(
        elementary=dict(elem),
        general={"P": game_from_formula(parse(PQ_TREE)),
                 "Q": game_from_formula(parse("(F + T) * (T + F)"))})


def circ_proof(text, system=CL9):
    p = decide(parse(text), system)
    assert p is not None, f"{text} should be provable"
    return to_circ(p)


# ---------------------------------------------------------------------------
# machine strategies


def test_stable_elementary_machine_waits():
    p = circ_proof("p | ~p")
    i = Interpretation(elementary={"p": T})
    ms = machine_from_proof(p, i)
    assert ms.step([]) == []
    g = interpret(parse("p | ~p"), i)
    assert exhaustive_machine_wins(g, p, i)


def test_copycat_machine_wins_exhaustively():
    p = circ_proof("P | ~P")
    for i in (std_interp(), Interpretation(general={"P": game_from_formula(parse("T + F"))})):
        g = interpret(parse("P | ~P"), i)
        assert exhaustive_machine_wins(g, p, i)


def test_copycat_machine_mirrors_moves():
    p = circ_proof("P | ~P")
    i = std_interp()
    ms = machine_from_proof(p, i)
    ms.step([])
    out = ms.step(["1.1"])  # env chooses inside P; machine echoes into ~P
    assert out == ["2.1"]
    out = ms.step(["2.2"])  # now inside ~P's resolved child; echoed back
    assert out == ["1.2"]


def test_sequential_regression_machine_wins():
    f = parse("(~P * ~Q) | (P |> Q)")
    p = circ_proof(fprint(f))
    for i in (std_interp(), Interpretation(
            general={"P": game_from_formula(parse("F + T")),
                     "Q": game_from_formula(parse("T + F"))})):
        g = interpret(f, i)
        assert exhaustive_machine_wins(g, p, i)


def test_seq_demorgan_copycat_machine_wins():
    f = parse("(~p |> ~q) | (p &> q)")
    p = decide(f, CL9)
    if p is None:
        pytest.skip("not provable; covered by prover tests")
    i = Interpretation(elementary={"p": B, "q": T})
    g = interpret(f, i)
    assert exhaustive_machine_wins(g, to_circ(p), i)


@pytest.mark.parametrize("text", [
    "(p * q) -> p",
    "((p * q) + r) -> ((p + r) * (q + r))",
    "(P &> Q) -> (P |> Q)",
])
def test_classic_provables_machine_wins(text):
    f = parse(text)
    p = decide(f, CL9)
    if p is None:
        pytest.skip(f"{text} not provable; covered by prover tests")
    i = std_interp(p=T, q=B, r=T)
    g = interpret(f, i)
    assert exhaustive_machine_wins(g, to_circ(p), i)


def test_corrupted_proof_loses():
    f = parse("q + (p | ~p)")
    p = decide(f, CL9)
    assert p is not None and p.rule == "Choose" and p.detail.index == 1
    i = Interpretation(elementary={"p": T, "q": B})
    g = interpret(f, i)
    pc = to_circ(p)
    assert exhaustive_machine_wins(g, pc, i)
    bad = dataclasses.replace(pc, detail=dataclasses.replace(pc.detail, index=0))
    assert not exhaustive_machine_wins(g, bad, i, verify=False)


def test_machine_rejects_illegal_adversary_move():
    p = circ_proof("P | ~P")
    ms = machine_from_proof(p, std_interp())
    ms.step([])
    with pytest.raises(AdversaryIllegal):
        ms.step(["7.7"])


def test_machine_requires_circ_proof():
    p = decide(parse("P | ~P"), CL9)
    with pytest.raises(StrategyError):
        machine_from_proof(p, std_interp())


# ---------------------------------------------------------------------------
# environment counterstrategies


def test_counterstrategy_null_machine():
    f = parse("p + ~p")
    r = refute(f)
    assert r is not None
    es = env_from_refutation(r)
    g = interpret(f, default_interpretation(f))
    res = play(g, NullAdversary(), es)
    assert not res.timed_out
    assert res.winner == B  # unresolved machine choice
    assert fprint(res.limit_formula) == "(p + ~p)"
    val = post_hoc_falsify(res.limit_formula)
    gi = interpret(f, valuation_to_interpretation(val, f))
    assert winner(gi, res.run) == B


def test_counterstrategy_follows_machine_choice():
    f = parse("p + ~p")
    r = refute(f)
    es = env_from_refutation(r)
    i = default_interpretation(f)
    g = interpret(f, i)
    res = play(g, GreedyChooseAdversary(g, T), es)
    assert fprint(res.limit_formula) in ("p", "~p")
    val = post_hoc_falsify(res.limit_formula)
    gi = interpret(f, valuation_to_interpretation(val, f))
    assert winner(gi, res.run) == B


def test_counterstrategy_switches_proactively():
    f = parse("p &> q")
    r = refute(f)
    assert r is not None and r.rule == "SwitchBar"
    es = env_from_refutation(r)
    g = interpret(f, default_interpretation(f))
    res = play(g, NullAdversary(), es)
    assert (B, "§") in res.run
    assert fprint(res.limit_formula) == "(p &> [q])"
    val = post_hoc_falsify(res.limit_formula)
    assert val == {"q": False}
    gi = interpret(f, valuation_to_interpretation(val, f))
    assert winner(gi, res.run) == B


def test_counterstrategy_answers_machine_switch():
    f = parse("p |> q")
    r = refute(f)
    assert r is not None
    es = env_from_refutation(r)
    i = default_interpretation(f)
    g = interpret(f, i)

    class Switcher:
        done = False

        def step(self, observed):
            if self.done:
                return []
            self.done = True
            return ["§"]

    res = play(g, Switcher(), es)
    # env caught up, underline advanced, and the limit falsifies
    assert res.run[:2] == ((T, "§"), (B, "§"))
    assert fprint(res.limit_formula) == "(p |> [q])"
    val = post_hoc_falsify(res.limit_formula)
    gi = interpret(f, valuation_to_interpretation(val, f))
    assert winner(gi, res.run) == B


@pytest.mark.parametrize("text,seed", [
    ("p + ~p", 1), ("p + ~p", 2), ("(p * q) + (p + q)", 3),
    ("(p &> q) + r", 4), ("p |> (q * ~q)", 5),
])
def test_counterstrategy_beats_random_machines(text, seed):
    f = parse(text)
    r = refute(f)
    if r is None:
        pytest.skip(f"{text} is CL10-provable")
    es = env_from_refutation(r)
    i = default_interpretation(f)
    g = interpret(f, i)
    res = play(g, RandomAdversary(g, T, seed), es)
    assert not res.timed_out
    val = post_hoc_falsify(res.limit_formula)
    gi = interpret(f, valuation_to_interpretation(val, f))
    assert winner(gi, res.run) == B


def test_env_requires_bar_refutation():
    p = decide(parse("p | ~p"), CL10)
    with pytest.raises(StrategyError):
        env_from_refutation(p)


# ---------------------------------------------------------------------------
# play harness


def test_play_machine_vs_random_env():
    f = parse("(~P * ~Q) | (P |> Q)")
    p = circ_proof(fprint(f))
    i = std_interp()
    g = interpret(f, i)
    for seed in range(6):
        ms = machine_from_proof(p, i)
        res = play(g, ms, RandomAdversary(g, B, seed))
        assert not res.timed_out
        assert res.winner == T


def test_play_trace_records_moves():
    f = parse("q + (p | ~p)")
    p = to_circ(decide(f, CL9))
    i = Interpretation(elementary={"p": T, "q": B})
    g = interpret(f, i)
    res = play(g, machine_from_proof(p, i), NullAdversary())
    assert res.run == ((T, "2"),)
    assert res.winner == T
