"""CLI subcommand tests (direct invocation of the command functions)."""

import json

import pytest

from clarena.cli import build_parser


def run_cli(capsys, *argv):
    args = build_parser().parse_args(list(argv))
    code = args.fn(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_decide_provable(capsys):
    code, out, _ = run_cli(capsys, "decide", "(P + Q) -> (P |> Q)")
    assert code == 0
    assert out.startswith("provable:")


def test_decide_unprovable(capsys):
    code, out, _ = run_cli(capsys, "decide", "(P |> Q) -> (P + Q)")
    assert code == 1
    assert out.startswith("unprovable:")


def test_decide_malformed(capsys):
    with pytest.raises(SystemExit) as exc:
        run_cli(capsys, "decide", "(p &")
    assert exc.value.code == 2


def test_decide_writes_checkable_proof(capsys, tmp_path):
    path = tmp_path / "proof.json"
    code, _, _ = run_cli(capsys, "decide", "(P + Q) -> (P |> Q)",
                         "--proof", str(path))
    assert code == 0
    code, out, _ = run_cli(capsys, "verify-proof", str(path))
    assert code == 0 and out.strip() == "valid"
    # corrupt it: point the serialized root at a different formula
    obj = json.loads(path.read_text())
    obj["formula"] = "(p | ~p)"
    path.write_text(json.dumps(obj))
    code, out, _ = run_cli(capsys, "verify-proof", str(path))
    assert code == 1 and out.startswith("invalid")


def test_decide_cl11qf(capsys, tmp_path):
    path = tmp_path / "fo.json"
    code, _, _ = run_cli(capsys, "decide",
                         "+x:(P(x) &> ~P(x)) | +x:(~P(x) &> P(x)) | *x:(P(x) + ~P(x))",
                         "--system", "cl11qf", "--proof", str(path))
    assert code == 0
    code, out, _ = run_cli(capsys, "verify-proof", str(path), "--system", "cl11qf")
    assert code == 0


def test_refute(capsys):
    code, out, _ = run_cli(capsys, "refute", "p + ~p")
    assert code == 0 and out.startswith("refutable:")
    code, out, _ = run_cli(capsys, "refute", "p | ~p")
    assert code == 1


def test_play_exhaustive(capsys):
    code, out, _ = run_cli(capsys, "play", "(~P * ~Q) | (P |> Q)",
                           "--env", "exhaustive")
    assert code == 0
    assert "machine wins all branches" in out


def test_play_random(capsys):
    code, out, _ = run_cli(capsys, "play", "(~P * ~Q) | (P |> Q)",
                           "--env", "random:7")
    assert code == 0
    assert "winner: T" in out


def test_play_scripted(capsys, tmp_path):
    script = tmp_path / "moves.txt"
    script.write_text("1.2\n")
    code, out, _ = run_cli(capsys, "play", "(~p * ~q) | (p |> q)",
                           "--env", f"scripted:{script}",
                           "--interp", '{"elementary": {"p": "tt", "q": "ff"}}')
    assert code == 0
    assert "winner: T" in out


def test_corpus_deterministic(capsys):
    code1, out1, _ = run_cli(capsys, "corpus", "--max-size", "4",
                             "--atoms", "p,q")
    code2, out2, _ = run_cli(capsys, "corpus", "--max-size", "4",
                             "--atoms", "p,q")
    assert code1 == code2 == 0
    assert out1 == out2
    lines = out1.strip().splitlines()
    assert len(lines) == len(set(lines))
    assert "p" in lines and "~p" in lines


@pytest.mark.parametrize("suite", ["demorgan", "static", "delay"])
def test_fuzz_suites_clean(capsys, suite):
    code, out, _ = run_cli(capsys, "fuzz", "--suite", suite,
                           "--seed", "7", "--trials", "40")
    assert code == 0
    assert "0 violations" in out
