"""HTTP JSON session service: interactive plays against extracted strategies.

Sessions are in-memory; an optional append-only journal (one JSON record per
event, path from CLARENA_JOURNAL) supports crash replay.  The server is
authoritative on legality: clients render exactly the moves listed in
`legalMoves` and never decide legality themselves.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .formulas import (
    FormulaError, atom_names, fprint, is_elementary_base, parse,
)
from .fo import check_fo  # noqa: F401  (re-exported for CLI symmetry)
from .games import (
    B, GameTree, Interpretation, T, game_from_formula, interpret, legal_moves,
    run_to_json, winner,
)
from .prover import CL9, CL10, decide, proof_to_json, refute, to_circ
from .strategy import EnvStrategy, MachineStrategy

DEFAULT_GENERAL = "(T + F) * (F + T)"


def build_interpretation(f, payload: Optional[dict]) -> Interpretation:
    """Elementary atoms default to tt, general atoms to the standard depth-2
    choice tree, unless the payload overrides them."""
    payload = payload or {}
    elem: dict = {}
    gen: dict = {}
    for name in atom_names(f):
        if name[0].isupper():
            text = payload.get("general", {}).get(name, DEFAULT_GENERAL)
            gen[name] = game_from_formula(parse(text))
        else:
            val = payload.get("elementary", {}).get(name, "tt")
            if val not in ("tt", "ff"):
                raise FormulaError(f"elementary value must be tt/ff, got {val!r}")
            elem[name] = T if val == "tt" else B
    return Interpretation(elementary=elem, general=gen)


class Session:
    def __init__(self, sid: str, formula, interp: Interpretation,
                 human_role: str, engine, g: GameTree):
        self.id = sid
        self.formula = formula
        self.interp = interp
        self.human_role = human_role  # "environment" or "machine"
        self.engine = engine
        self.g = g
        self.run: list = []
        self.lock = threading.Lock()

    @property
    def human_player(self) -> str:
        return B if self.human_role == "environment" else T

    @property
    def engine_player(self) -> str:
        return T if self.human_role == "environment" else B

    def human_moves(self) -> list:
        return sorted(legal_moves(self.g, tuple(self.run), self.human_player))

    def finished(self) -> bool:
        # human moves are the only external events, and the engine replies
        # within the same request: once the human is out of legal moves the
        # position can never change again
        return not self.human_moves()

    def state(self) -> dict:
        done = self.finished()
        out = {
            "id": self.id,
            "formula": fprint(self.formula),
            "currentFormulaView": fprint(self.engine.e),
            "humanRole": self.human_role,
            "legalMoves": [] if done else self.human_moves(),
            "run": run_to_json(tuple(self.run)),
            "status": "finished" if done else "open",
        }
        if done:
            out["winner"] = winner(self.g, tuple(self.run))
        return out


SESSIONS: dict = {}
_STORE_LOCK = threading.Lock()


def _journal(event: dict) -> None:
    path = os.environ.get("CLARENA_JOURNAL")
    if not path:
        return
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(event) + "\n")


class DecideRequest(BaseModel):
    formula: str
    system: str = "cl9"


class SessionRequest(BaseModel):
    formula: str
    humanRole: str
    interpretation: Optional[dict] = None


class MoveRequest(BaseModel):
    move: str


app = FastAPI(title="clarena", version="0.1.0")


@app.post("/api/decide")
def api_decide(req: DecideRequest):
    from .fo import decide_fo, fo_proof_to_json, parse_fo

    try:
        if req.system == "cl11qf":
            p = decide_fo(parse_fo(req.formula))
            return {"provable": p is not None,
                    "proof": fo_proof_to_json(p) if p else None}
        system = {"cl9": CL9, "cl10": CL10}.get(req.system)
        if system is None:
            raise HTTPException(400, f"unknown system {req.system!r}")
        p = decide(parse(req.formula), system)
        return {"provable": p is not None,
                "proof": proof_to_json(p) if p else None}
    except FormulaError as exc:
        raise HTTPException(400, f"bad formula: {exc}")


@app.post("/api/sessions", status_code=201)
def create_session(req: SessionRequest):
    try:
        f = parse(req.formula)
        interp = build_interpretation(f, req.interpretation)
    except FormulaError as exc:
        raise HTTPException(400, f"bad request: {exc}")
    if req.humanRole == "environment":
        proof = decide(f, CL9)
        if proof is None:
            raise HTTPException(
                400, "humanRole=environment needs a provable formula "
                     "(the engine plays the extracted machine strategy)")
        engine = MachineStrategy(to_circ(proof), interp)
    elif req.humanRole == "machine":
        if not is_elementary_base(f):
            raise HTTPException(
                400, "humanRole=machine needs an elementary-base formula")
        refutation = refute(f)
        if refutation is None:
            raise HTTPException(
                400, "humanRole=machine needs an unprovable formula "
                     "(the engine plays the counterstrategy)")
        engine = EnvStrategy(refutation, interp)
    else:
        raise HTTPException(400, "humanRole must be 'environment' or 'machine'")
    g = interpret(f, interp)
    sid = uuid.uuid4().hex[:12]
    sess = Session(sid, f, interp, req.humanRole, engine, g)
    # the engine may open proactively (e.g. a counterstrategy's own choices)
    for mv in engine.step([]):
        sess.run.append((sess.engine_player, mv))
    with _STORE_LOCK:
        SESSIONS[sid] = sess
    _journal({"event": "create", "id": sid, "formula": fprint(f),
              "humanRole": req.humanRole})
    return sess.state()


def _get(sid: str) -> Session:
    with _STORE_LOCK:
        sess = SESSIONS.get(sid)
    if sess is None:
        raise HTTPException(404, f"unknown session {sid!r}")
    return sess


@app.get("/api/sessions/{sid}")
def get_session(sid: str):
    return _get(sid).state()


@app.post("/api/sessions/{sid}/moves")
def post_move(sid: str, req: MoveRequest):
    sess = _get(sid)
    with sess.lock:
        if sess.finished():
            raise HTTPException(409, "session is finished")
        options = sess.human_moves()
        if req.move not in options:
            raise HTTPException(
                400, f"illegal move {req.move!r}; legal moves: {options}")
        sess.run.append((sess.human_player, req.move))
        # engine replies applied atomically with the triggering human move
        for mv in sess.engine.step([req.move]):
            sess.run.append((sess.engine_player, mv))
        _journal({"event": "move", "id": sid, "move": req.move,
                  "run": run_to_json(tuple(sess.run))})
        return sess.state()


@app.delete("/api/sessions/{sid}", status_code=204)
def delete_session(sid: str):
    _get(sid)
    with _STORE_LOCK:
        SESSIONS.pop(sid, None)
    _journal({"event": "delete", "id": sid})


def main(port: Optional[int] = None) -> None:
    import uvicorn

    if port is None:
        port = int(os.environ.get("CLARENA_PORT", "8000"))
    uvicorn.run(app, host="127.0.0.1", port=port)
