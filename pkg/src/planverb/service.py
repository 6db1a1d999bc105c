"""HTTP study service: serves warehouse scenarios to a browser UI and
records participant answers.

A session walks one participant through 12 scenarios.  Per scenario the
verbalization grows one sentence per step; the strategy behind it is drawn
from a seeded, balanced assignment (four scenarios each) and never appears
in step payloads.  Every accepted answer is appended to a JSON-lines log,
from which the session's results can be recomputed byte-for-byte.
"""

from __future__ import annotations

import json
import statistics
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .mirror import MirrorModel
from .strategies import Strategy, select
from .warehouse import (
    Scenario,
    StepRecord,
    build_scenario_model,
    earliest_correct_samples,
    generate_batch,
    hit_ratio_curve,
    significance_test,
)

NUM_SCENARIOS = 12
STRATEGY_NAMES = ("increasing", "decreasing", "informative")

#: pairwise one-sided comparisons reported in results
PAIRS = (
    ("informative", "increasing"),
    ("informative", "decreasing"),
    ("decreasing", "increasing"),
)


@dataclass
class _ScenarioSlot:
    scenario: Scenario
    model: MirrorModel
    strategy: Strategy

    @property
    def total_steps(self) -> int:
        return len(self.model.distinct_actions())


@dataclass
class _Session:
    id: str
    slots: list[_ScenarioSlot]
    log_path: Path
    scenario_index: int = 0
    step: int = 1
    step_started: float = field(default_factory=time.monotonic)
    records: list[StepRecord] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def done(self) -> bool:
        return self.scenario_index >= len(self.slots)

    def append_log(self, record: dict) -> None:
        with self.log_path.open("a") as handle:
            handle.write(json.dumps(record, sort_keys=True) + "\n")


def _balanced_strategies(rng, count: int) -> list[Strategy]:
    per = count // len(STRATEGY_NAMES)
    assignment = [Strategy.parse(name) for name in STRATEGY_NAMES for _ in range(per)]
    rng.shuffle(assignment)
    return assignment


def _results_payload(session_id: str, records: list[StepRecord], complete: bool,
                     plan_lengths: list[int]) -> dict:
    curve = hit_ratio_curve(records)
    known = [r for r in records if r.predicted is not None]
    earliest = earliest_correct_samples(records) if complete else {}
    pairwise = {}
    for a, b in PAIRS:
        if len(earliest.get(a, [])) >= 2 and len(earliest.get(b, [])) >= 2:
            pairwise[f"{a}<{b}"] = significance_test(earliest[a], earliest[b])
        else:
            pairwise[f"{a}<{b}"] = None
    return {
        "session": session_id,
        "complete": complete,
        "answered_steps": len(records),
        "hit_ratio_curve": curve,
        "hit_ratio_curve_excluding_dont_know": hit_ratio_curve(known),
        "earliest_correct": earliest,
        "pairwise_p": pairwise,
        "mean_plan_length": statistics.fmean(plan_lengths) if plan_lengths else None,
    }


def recompute_results(log_path: str | Path) -> dict:
    """Rebuild a session's results purely from its append-only log."""
    session_id = ""
    total_steps = 0
    plan_lengths: list[int] = []
    records: list[StepRecord] = []
    for line in Path(log_path).read_text().splitlines():
        entry = json.loads(line)
        if entry["type"] == "session":
            session_id = entry["id"]
            total_steps = entry["total_answer_steps"]
            plan_lengths = entry["plan_lengths"]
        elif entry["type"] == "answer":
            records.append(
                StepRecord(
                    scenario_seed=entry["scenario_seed"],
                    strategy=entry["strategy"],
                    step=entry["step"],
                    total_steps=entry["total_steps"],
                    predicted=entry["answer"],
                    correct=entry["correct"],
                )
            )
    return _results_payload(session_id, records, len(records) == total_steps, plan_lengths)


def create_app(
    seed: int = 0,
    out_dir: str | Path = "study-out",
    num_scenarios: int = NUM_SCENARIOS,
) -> FastAPI:
    """Build the study service.

    Scenario content is shared by all sessions (seeds `seed`..`seed+n-1`);
    the strategy assignment is reshuffled per session, balanced across the
    three strategies when `num_scenarios` is a multiple of three.
    """
    import random

    if num_scenarios % len(STRATEGY_NAMES) != 0:
        raise ValueError("num_scenarios must be a multiple of 3 for balanced assignment")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scenarios = generate_batch(seed, num_scenarios)
    models = [build_scenario_model(s) for s in scenarios]

    app = FastAPI(title="plan verbalization study")
    # the browser client may be served from a different origin
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, _Session] = {}
    counter = {"next": 0}
    create_lock = threading.Lock()

    def error(status: int, message: str) -> JSONResponse:
        return JSONResponse({"error": message}, status_code=status)

    def current_slot(session: _Session) -> _ScenarioSlot:
        return session.slots[session.scenario_index]

    def step_payload(session: _Session) -> dict:
        if session.done:
            return {
                "session": session.id,
                "done": True,
                "scenario_count": len(session.slots),
            }
        slot = current_slot(session)
        selection = select(slot.strategy, slot.model, session.step)
        return {
            "session": session.id,
            "done": False,
            "scenario_index": session.scenario_index,
            "scenario_count": len(session.slots),
            "step": session.step,
            "total_steps": slot.total_steps,
            "image": slot.scenario.image_model(),
            "sentences": slot.scenario.sentences(selection.actions),
            "options": [g.description for g in slot.scenario.goals],
            "dont_know_allowed": True,
        }

    @app.post("/sessions")
    def create_session() -> JSONResponse:
        with create_lock:
            index = counter["next"]
            counter["next"] += 1
        rng = random.Random(seed * 100003 + index)
        strategies = _balanced_strategies(rng, num_scenarios)
        session_id = uuid.uuid4().hex
        slots = [
            _ScenarioSlot(scenario, model, strategy)
            for scenario, model, strategy in zip(scenarios, models, strategies)
        ]
        session = _Session(session_id, slots, out / f"{session_id}.jsonl")
        sessions[session_id] = session
        session.append_log(
            {
                "type": "session",
                "id": session_id,
                "session_index": index,
                "seed": seed,
                "created": time.time(),
                "scenario_seeds": [s.scenario.seed for s in slots],
                "strategies": [s.strategy.value for s in slots],
                "plan_lengths": [len(s.model.robot_plan.actions) for s in slots],
                "total_answer_steps": sum(s.total_steps for s in slots),
            }
        )
        return JSONResponse(
            {
                "session": session_id,
                "scenario_count": len(slots),
                "total_answer_steps": sum(s.total_steps for s in slots),
            },
            status_code=201,
        )

    @app.get("/sessions/{session_id}/step")
    def get_step(session_id: str):
        session = sessions.get(session_id)
        if session is None:
            return error(404, "unknown session")
        return step_payload(session)

    @app.post("/sessions/{session_id}/answer")
    async def post_answer(session_id: str, request: Request):
        session = sessions.get(session_id)
        if session is None:
            return error(404, "unknown session")
        try:
            body = await request.json()
        except Exception:
            return error(400, "body must be JSON")
        if not isinstance(body, dict) or "answer" not in body:
            return error(400, "missing 'answer'")
        answer = body["answer"]
        if answer is not None and answer not in (0, 1, 2):
            return error(400, "answer must be 0, 1, 2 or null")
        client_elapsed = body.get("client_elapsed_ms")
        if client_elapsed is not None and not isinstance(client_elapsed, (int, float)):
            return error(400, "client_elapsed_ms must be a number")
        with session.lock:
            if session.done:
                return error(409, "session already complete")
            # the client must echo the step it is answering
            if (
                body.get("scenario_index") != session.scenario_index
                or body.get("step") != session.step
            ):
                return error(409, "answer out of order")
            slot = current_slot(session)
            correct = answer == slot.scenario.true_goal_index
            record = StepRecord(
                scenario_seed=slot.scenario.seed,
                strategy=slot.strategy.value,
                step=session.step,
                total_steps=slot.total_steps,
                predicted=answer,
                correct=correct,
            )
            session.records.append(record)
            session.append_log(
                {
                    "type": "answer",
                    "scenario_index": session.scenario_index,
                    "scenario_seed": slot.scenario.seed,
                    "strategy": slot.strategy.value,
                    "step": session.step,
                    "total_steps": slot.total_steps,
                    "answer": answer,
                    "correct": correct,
                    "client_elapsed_ms": client_elapsed,
                    "server_elapsed_ms": (time.monotonic() - session.step_started) * 1000.0,
                    "received": time.time(),
                }
            )
            if session.step < slot.total_steps:
                session.step += 1
            else:
                session.scenario_index += 1
                session.step = 1
            session.step_started = time.monotonic()
            return {
                "accepted": True,
                "done": session.done,
                "scenario_index": session.scenario_index if not session.done else None,
                "step": session.step if not session.done else None,
            }

    @app.get("/sessions/{session_id}/results")
    def get_results(session_id: str):
        session = sessions.get(session_id)
        if session is None:
            return error(404, "unknown session")
        plan_lengths = [len(s.model.robot_plan.actions) for s in session.slots]
        return _results_payload(session.id, session.records, session.done, plan_lengths)

    return app
