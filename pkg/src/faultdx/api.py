"""HTTP JSON API: stateless circuit analysis plus the study session flow.

Sessions move through a fixed curriculum — three learning phases, then 15
trial items — with group-dependent content served to the two study arms.
State is kept in memory and journaled to an append-only JSONL event log, so a
restarted service can rebuild every open session. Per-trial elapsed time is
measured server-side between serving an item and receiving its answer.
"""

from __future__ import annotations

import json
import random
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ConfigDict

from faultdx.circuit import (
    CircuitParseError,
    CircuitValidationError,
    FaultScenario,
    observed_outcome,
    parse_circuit,
    simulate,
    validate,
)
from faultdx.config import AppConfig
from faultdx.errors import FaultDxError, SimulationError, StrategyError
from faultdx.sessions import ESCAPE, TrialRecord, score_response
from faultdx.strategy import evaluate_test, optimal_test
from faultdx.study import (
    GROUPS,
    Phase,
    domain_intro,
    grade_phase,
    learning_phases,
    trial_items,
    trial_payload,
)
from faultdx.sessions import Domain

# --- request/response models -------------------------------------------------


class AnalyzeRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    facts: str


class SimulateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    facts: str
    fault: int
    test: Optional[str] = None


class CreateSessionRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    participant: str
    group: Optional[Literal["self_learning", "machine_explained"]] = None
    seed: Optional[int] = None


class PhaseAnswer(BaseModel):
    model_config = ConfigDict(extra="forbid")
    phase: int
    answer: dict


class TrialAnswer(BaseModel):
    model_config = ConfigDict(extra="forbid")
    item_id: str
    choice: str


# --- session state -----------------------------------------------------------


@dataclass
class SessionState:
    session_id: str
    participant: str
    group: str
    seed: int
    phase: int = 1  # 1..3 learning, 4 = trials, 5 = finalized
    trial_index: int = 0
    served_at: Optional[float] = None
    records: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def items(self):
        return trial_items(self.seed)


class SessionStore:
    """In-memory sessions journaled to an append-only event log."""

    def __init__(self, data_dir: str | Path):
        self.path = Path(data_dir) / "sessions.jsonl"
        self._lock = threading.Lock()
        self._sessions: dict[str, SessionState] = {}
        self._replay()

    def _replay(self):
        if not self.path.exists():
            return
        with open(self.path) as f:
            for line in f:
                if not line.strip():
                    continue
                event = json.loads(line)
                self._apply(event)

    def _apply(self, event: dict):
        kind = event["event"]
        if kind == "created":
            self._sessions[event["session_id"]] = SessionState(
                session_id=event["session_id"],
                participant=event["participant"],
                group=event["group"],
                seed=event["seed"],
            )
            return
        state = self._sessions.get(event["session_id"])
        if state is None:
            return
        if kind == "phase_submitted":
            state.phase = event["next_phase"]
        elif kind == "trial_submitted":
            state.records.append(event["record"])
            state.trial_index += 1
            state.served_at = None
        elif kind == "finalized":
            state.phase = 5

    def journal(self, event: dict):
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a") as f:
                f.write(json.dumps(event, sort_keys=True) + "\n")
                f.flush()

    def create(self, participant: str, group: str, seed: int) -> SessionState:
        session_id = uuid.uuid4().hex[:12]
        event = {
            "event": "created",
            "session_id": session_id,
            "participant": participant,
            "group": group,
            "seed": seed,
        }
        with self._lock:
            self._apply(event)
        self.journal(event)
        return self._sessions[session_id]

    def get(self, session_id: str) -> SessionState:
        state = self._sessions.get(session_id)
        if state is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return state


# --- app factory -------------------------------------------------------------


def create_app(config: AppConfig | None = None) -> FastAPI:
    config = config or AppConfig()
    app = FastAPI(title="faultdx")
    store = SessionStore(config.data_dir)
    app.state.store = store
    app.state.config = config

    def parse_or_400(facts: str):
        try:
            c = parse_circuit(facts)
        except (CircuitParseError, CircuitValidationError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return c

    @app.post("/analyze")
    def analyze(body: AnalyzeRequest):
        c = parse_or_400(body.facts)
        report = validate(c)
        evaluations = []
        for label in sorted(c.test_points.values()):
            ev = evaluate_test(c, label, c.gates)
            evaluations.append({
                "test": ev.test,
                "inside": sorted(ev.inside),
                "outside": sorted(ev.outside),
                "excluded": sorted(ev.excluded),
                "sizes": list(ev.sizes),
                "minority_ratio": ev.minority_ratio,
                "entropy": ev.entropy,
            })
        try:
            best, sizes = optimal_test(c, c.gates)
        except StrategyError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {
            "warnings": list(report.warnings),
            "tests": evaluations,
            "optimal": {"test": best, "sizes": list(sizes)},
        }

    @app.post("/simulate")
    def run_simulation(body: SimulateRequest):
        c = parse_or_400(body.facts)
        try:
            state = simulate(c, FaultScenario(body.fault, injection=body.test))
            result = {
                "powered": {str(n): on for n, on in sorted(
                    state.powered.items(), key=lambda kv: str(kv[0]))},
                "sinks": {str(s): state.lit(s) for s in sorted(c.sinks)},
            }
            if body.test is not None:
                result["outcome"] = observed_outcome(c, body.fault, body.test).value
            return result
        except (SimulationError, StrategyError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.post("/sessions")
    def create_session(body: CreateSessionRequest):
        group = body.group or random.choice(GROUPS)
        seed = body.seed if body.seed is not None else config.seed
        state = store.create(body.participant, group, seed)
        return {"session_id": state.session_id, "group": state.group, "phase": state.phase}

    @app.get("/sessions/{session_id}")
    def session_info(session_id: str):
        state = store.get(session_id)
        return {
            "session_id": state.session_id,
            "participant": state.participant,
            "group": state.group,
            "phase": state.phase,
            "trial_index": state.trial_index,
        }

    @app.get("/intro/{domain}")
    def intro(domain: str, worked_example: bool = False):
        try:
            d = Domain(domain)
        except ValueError:
            raise HTTPException(status_code=404, detail=f"unknown domain {domain!r}")
        return {"domain": d.value, "text": domain_intro(d, worked_example)}

    def current_phase(state: SessionState) -> Phase:
        if state.phase > 3:
            raise HTTPException(
                status_code=409, detail="learning phases already completed"
            )
        return learning_phases()[state.phase - 1]

    @app.get("/sessions/{session_id}/phase")
    def phase_content(session_id: str):
        state = store.get(session_id)
        phase = current_phase(state)
        return phase.payload_by_group[state.group]

    @app.post("/sessions/{session_id}/phase")
    def submit_phase(session_id: str, body: PhaseAnswer):
        state = store.get(session_id)
        with state.lock:
            phase = current_phase(state)
            if body.phase != state.phase:
                raise HTTPException(
                    status_code=409,
                    detail=f"expected phase {state.phase}, got {body.phase}",
                )
            feedback = grade_phase(phase, body.answer, state.group)
            event = {
                "event": "phase_submitted",
                "session_id": state.session_id,
                "phase": state.phase,
                "next_phase": state.phase + 1,
            }
            store._apply(event)
        store.journal(event)
        feedback["next_phase"] = state.phase
        return feedback

    @app.get("/sessions/{session_id}/trial")
    def trial_content(session_id: str):
        state = store.get(session_id)
        if state.phase < 4:
            raise HTTPException(status_code=409, detail="learning phases not completed")
        if state.phase > 4 or state.trial_index >= len(state.items):
            raise HTTPException(status_code=409, detail="trials already completed")
        with state.lock:
            state.served_at = time.monotonic()
            payload = trial_payload(state.items[state.trial_index])
            payload["index"] = state.trial_index
            payload["total"] = len(state.items)
            return payload

    @app.post("/sessions/{session_id}/trial")
    def submit_trial(session_id: str, body: TrialAnswer):
        state = store.get(session_id)
        with state.lock:
            if state.phase != 4 or state.trial_index >= len(state.items):
                raise HTTPException(status_code=409, detail="no trial awaiting an answer")
            item = state.items[state.trial_index]
            if body.item_id != item.item_id:
                raise HTTPException(
                    status_code=409,
                    detail=f"expected item {item.item_id}, got {body.item_id}",
                )
            if body.choice != ESCAPE and body.choice not in item.options:
                raise HTTPException(
                    status_code=400, detail=f"choice {body.choice!r} not offered"
                )
            elapsed = (
                time.monotonic() - state.served_at
                if state.served_at is not None
                else None
            )
            record = score_response(item, body.choice, participant=state.participant)
            row = {
                "participant": record.participant,
                "item_id": record.item_id,
                "choice": record.choice,
                "raw_entropy": record.raw_entropy,
                "normalized_score": record.normalized_score,
                "excluded": record.excluded,
                "invalid_item": record.invalid_item,
                "elapsed_seconds": elapsed,
            }
            event = {
                "event": "trial_submitted",
                "session_id": state.session_id,
                "record": row,
            }
            store._apply(event)
        store.journal(event)
        done = state.trial_index >= len(state.items)
        return {
            "recorded": True,
            "excluded": record.excluded,
            "normalized_score": record.normalized_score,
            "remaining": len(state.items) - state.trial_index,
            "done": done,
        }

    @app.post("/sessions/{session_id}/finalize")
    def finalize(session_id: str):
        state = store.get(session_id)
        with state.lock:
            if state.phase != 4 or state.trial_index < len(state.items):
                raise HTTPException(status_code=409, detail="session not complete")
            event = {"event": "finalized", "session_id": state.session_id}
            store._apply(event)
        store.journal(event)
        scored = [
            r["normalized_score"] for r in state.records if not r["excluded"]
        ]
        times = [
            r["elapsed_seconds"] for r in state.records
            if r["elapsed_seconds"] is not None
        ]
        return {
            "session_id": state.session_id,
            "group": state.group,
            "records": state.records,
            "mean_score": sum(scored) / len(scored) if scored else None,
            "excluded_count": sum(1 for r in state.records if r["excluded"]),
            "mean_elapsed_seconds": sum(times) / len(times) if times else None,
        }

    return app
