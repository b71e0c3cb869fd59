"""Study content and curriculum logic: domain introductions, the three
learning phases with group-dependent feedback, and the 15-item trial set.

Content (texts, circuits, traces) lives in assets/study.json; correct answers
and feedback highlights are derived from the circuits at load time, never
stored. The two groups see identical problems — the machine_explained group
additionally receives explanation texts, feedback highlights, and the split
sizes in phase 3.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from faultdx.circuit import Circuit, Node, Outcome, parse_circuit
from faultdx.errors import SessionError
from faultdx.sessions import (
    Domain,
    TrialItem,
    list_to_circuit,
    make_circuit_item,
    map_waterflow,
)
from faultdx.strategy import exclusive_power_set, partition

GROUPS = ("self_learning", "machine_explained")

CERTAINLY_WORKING = "certainly_working"
POTENTIALLY_FAULTY = "potentially_faulty"
DONT_KNOW = "dont_know"


@lru_cache(maxsize=1)
def _content() -> dict:
    path = resources.files("faultdx") / "assets" / "study.json"
    return json.loads(path.read_text())


def domain_intro(domain: Domain, with_worked_example: bool = False) -> str:
    """Domain introduction text; the worked example only appears when the
    domain is re-introduced after the learning phases."""
    intro = _content()["domain_intros"][domain.value]
    if with_worked_example:
        return intro["base"] + "\n\n" + intro["worked_example"]
    return intro["base"]


def circuit_payload(c: Circuit, node_names: dict[str, str] | None = None) -> dict:
    """Graph JSON served to the UI: nodes, edges, test-point labels."""
    names = node_names or {}
    nodes = []
    for node in sorted(c.nodes(), key=str):
        if node in c.sources:
            kind = "source"
        elif node in c.gates:
            kind = "gate"
        else:
            kind = "sink"
        nodes.append({
            "id": str(node),
            "kind": kind,
            "name": names.get(str(node), str(node)),
            "test_label": c.test_points.get(node),
        })
    return {
        "nodes": nodes,
        "edges": [{"from": str(a), "to": str(b)} for a, b in sorted(c.edges, key=str)],
    }


# --- phase 1: exclusive power sources ----------------------------------------

def exclusive_sources(c: Circuit, point: Node) -> frozenset:
    """Gates AND sources all of whose outgoing paths lead to ``point``.

    Extends the gate-only fixpoint with battery nodes, matching the phase-1
    question which offers batteries as options too.
    """
    members = set(exclusive_power_set(c, point))
    changed = True
    while changed:
        changed = False
        for s in c.sources - members:
            outs = c.children.get(s, frozenset())
            if outs and all(t == point or t in members for t in outs):
                members.add(s)
                changed = True
    return frozenset(members)


# --- loading -----------------------------------------------------------------

@dataclass(frozen=True)
class Phase:
    number: int
    payload_by_group: dict  # group -> served content
    correct: dict  # grading key, shape depends on the phase


def _phase1() -> Phase:
    raw = _content()["phase1"]
    c = parse_circuit(raw["circuit"])
    names = raw["node_names"]
    correct_nodes = exclusive_sources(c, raw["target_sink"])
    correct = sorted(names.get(str(n), str(n)) for n in correct_nodes)
    base = {
        "phase": 1,
        "kind": "multiple_choice",
        "task_text": raw["task_text"],
        "graph": circuit_payload(c, names),
        "options": raw["options"],
    }
    h2 = dict(base)
    h2["explanation"] = _content()["explanations"]["phase1"]
    return Phase(
        number=1,
        payload_by_group={"self_learning": base, "machine_explained": h2},
        correct={"selections": correct, "highlight": sorted(str(n) for n in correct_nodes)},
    )


def _phase2() -> Phase:
    raw = _content()["phase2"]
    problems, correct_sets = [], []
    for spec in raw["circuits"]:
        c = parse_circuit(spec["circuit"])
        inside, outside, _ = partition(c, spec["test"], c.gates)
        outcome = Outcome(spec["outcome"])
        # a lit bulb clears everything downstream of the injection; a dark
        # bulb clears the masked upstream part instead
        faulty = inside if outcome is Outcome.LIT else outside
        working = outside if outcome is Outcome.LIT else inside
        problems.append({
            "graph": circuit_payload(c),
            "test": spec["test"],
            "outcome": outcome.value,
            "gates": sorted(str(g) for g in c.gates),
        })
        correct_sets.append({
            "answers": {
                **{str(g): POTENTIALLY_FAULTY for g in faulty},
                **{str(g): CERTAINLY_WORKING for g in working},
            },
            "highlight": sorted(str(g) for g in inside),
        })
    base = {
        "phase": 2,
        "kind": "per_gate_choice",
        "task_text": raw["task_text"],
        "choices": raw["choices"],
        "problems": problems,
    }
    h2 = dict(base)
    h2["explanation"] = _content()["explanations"]["phase2"]
    return Phase(
        number=2,
        payload_by_group={"self_learning": base, "machine_explained": h2},
        correct={"problems": correct_sets},
    )


def _phase3() -> Phase:
    raw = _content()["phase3"]
    c = parse_circuit(raw["circuit"])
    base_traces = {
        option: [{"test": step["test"]} for step in steps]
        for option, steps in raw["traces"].items()
    }
    h2_traces = raw["traces"]  # includes the split sizes
    base = {
        "phase": 3,
        "kind": "single_choice",
        "task_text": raw["task_text"],
        "graph": circuit_payload(c),
        "options": sorted(raw["traces"]),
        "traces": base_traces,
    }
    h2 = dict(base)
    h2["traces"] = h2_traces
    h2["explanation"] = _content()["explanations"]["phase3"]
    return Phase(
        number=3,
        payload_by_group={"self_learning": base, "machine_explained": h2},
        correct={"choice": raw["correct"]},
    )


@lru_cache(maxsize=1)
def learning_phases() -> tuple[Phase, Phase, Phase]:
    return (_phase1(), _phase2(), _phase3())


def grade_phase(phase: Phase, answer: dict, group: str) -> dict:
    """Correctness feedback for a learning-phase answer.

    Both groups get per-answer correctness; only machine_explained receives
    the highlight sets aligned with intermediary strategy outputs.
    """
    if group not in GROUPS:
        raise SessionError(f"unknown group {group!r}")
    feedback: dict = {"phase": phase.number}
    if phase.number == 1:
        chosen = sorted(answer.get("selections", []))
        feedback["correct"] = chosen == phase.correct["selections"]
        feedback["expected"] = phase.correct["selections"]
        if group == "machine_explained":
            feedback["highlight"] = phase.correct["highlight"]
    elif phase.number == 2:
        given = answer.get("problems", [])
        results = []
        for index, key in enumerate(phase.correct["problems"]):
            got = given[index] if index < len(given) else {}
            entry = {
                "correct": got == key["answers"],
                "expected": key["answers"],
            }
            if group == "machine_explained":
                entry["highlight"] = key["highlight"]
            results.append(entry)
        feedback["problems"] = results
        feedback["correct"] = all(r["correct"] for r in results)
    else:
        feedback["correct"] = answer.get("choice") == phase.correct["choice"]
        feedback["expected"] = phase.correct["choice"]
        if group == "machine_explained":
            feedback["explanation"] = _content()["explanations"]["phase3"]
    return feedback


# --- trial set ---------------------------------------------------------------

def trial_items(seed: int = 0) -> list[TrialItem]:
    """The 15-item trial set: 5 per domain, circuits block first, the other
    two domain blocks in seed-determined order."""
    structures = _content()["trial_structures"]
    circuits = [
        make_circuit_item(item_id, parse_circuit(structures[item_id]))
        for item_id in ("circuit_01", "circuit_02", "circuit_03", "circuit_04", "circuit_05")
    ]
    water = [
        map_waterflow(make_circuit_item(item_id, parse_circuit(structures[item_id])))
        for item_id in ("water_01", "water_02", "water_03", "water_04", "water_05")
    ]
    lists = [list_to_circuit(f"list_{n:02d}", n) for n in range(4, 9)]
    blocks = [water, lists]
    random.Random(seed).shuffle(blocks)
    return circuits + blocks[0] + blocks[1]


def trial_payload(item: TrialItem) -> dict:
    return {
        "item_id": item.item_id,
        "domain": item.domain.value,
        "graph": circuit_payload(item.circuit),
        "options": list(item.options),
        # which node each option tests, for rendering labels in the skin
        "option_targets": {
            opt: str(item.circuit.gate_for_label(item.circuit_label(opt)))
            for opt in item.options
        },
        "escape_option": "escape",
    }
