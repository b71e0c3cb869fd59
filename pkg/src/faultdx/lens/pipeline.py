"""Explanation pipeline: coding models interpret logic programs, a reasoning
model summarizes a consensus explanation, judge models rate it against a
reference answer.

Conditions vary how the explanation is generated: programs named or
anonymized, with or without the task-domain introduction (global context) and
the worked example (local context), or direct prompting that skips the
interpretation stage entirely.

All calls are keyed by request digest, so runs over fixture clients are fully
deterministic and resumable.
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

from faultdx.errors import ClientError, RatingParseError
from faultdx.lens.anonymize import anonymize_predicates
from faultdx.lens.clients import ModelClient, request_digest
from faultdx.lens.ledger import Ledger
from faultdx.lens.templates import PromptPair, render_prompt

_RATING = re.compile(r"Rating:\s*\[\[(-?\d+)\]\]")

#: instructions block for the judge system prompt
JUDGE_INSTRUCTIONS = (
    "The assistant was asked to explain, to a person with no programming or "
    "technical background, a strategy for solving the task in the question. "
    "Compare the assistant's answer against the reference answer. A good "
    "answer describes the same procedure as the reference, is correct and "
    "complete, and stays free of jargon, code, and variable names."
)


def parse_rating(text: str) -> int:
    """Extract the verdict from a judge response.

    Judges often restate the required format before concluding, so the LAST
    ``Rating: [[k]]`` occurrence counts.
    """
    matches = _RATING.findall(text)
    if not matches:
        raise RatingParseError("no 'Rating: [[k]]' token found")
    value = int(matches[-1])
    if not 1 <= value <= 10:
        raise RatingParseError(f"rating {value} outside 1..10")
    return value


@dataclass(frozen=True)
class Condition:
    program_naming: str = "named"  # named | anonymized
    global_context: bool = True
    local_context: bool = True
    direct_prompting: bool = False

    def __post_init__(self):
        if self.program_naming not in ("named", "anonymized"):
            raise ValueError(f"unknown program naming {self.program_naming!r}")

    @property
    def key(self) -> str:
        parts = ["direct"] if self.direct_prompting else []
        parts.append("ap" if self.program_naming == "anonymized" else "np")
        if self.global_context:
            parts.append("gc")
        if self.local_context:
            parts.append("lc")
        return "+".join(parts)


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    description: str
    question: str
    example_type: str
    example: str
    domain_context: str
    reference: str
    programs: tuple[str, ...]


def _asset(*parts: str) -> str:
    return (resources.files("faultdx") / "assets").joinpath(*parts).read_text()


def load_tasks() -> dict[str, TaskSpec]:
    """Shipped explanation tasks with their episode programs and references."""
    doc = json.loads(_asset("tasks.json"))
    tasks = {}
    for task_id, raw in doc["tasks"].items():
        tasks[task_id] = TaskSpec(
            task_id=task_id,
            description=raw["description"],
            question=raw["question"],
            example_type=raw["example_type"],
            example=raw["example"],
            domain_context=doc["domain_context"],
            reference=_asset("references", raw["reference"]).strip(),
            programs=tuple(
                _asset("episodes", name).strip() for name in raw["episodes"]
            ),
        )
    return tasks


@dataclass
class InterpretationCell:
    client: str
    repetition: int
    text: str | None
    error: str | None = None


@dataclass
class JudgeScore:
    judge: str
    repetition: int
    rating: int | None
    raw_text: str


@dataclass
class ExplanationRun:
    condition: Condition
    task_id: str
    programs: list[str]
    interpretations: list[InterpretationCell] = field(default_factory=list)
    consensus: str | None = None
    scores: list[JudgeScore] = field(default_factory=list)
    failed: bool = False

    def interpretation_texts(self) -> list[str]:
        return [c.text for c in self.interpretations if c.text is not None]


def coding_prompt(programs: list[str]) -> PromptPair:
    return render_prompt("coding", {"prolog": "\n\n".join(programs)})


def interpret_programs(
    clients: list[ModelClient],
    programs: list[str],
    repetitions: int = 1,
    parallelism: int = 1,
) -> list[InterpretationCell]:
    """One response per coding client × repetition over the program block.

    A client failure is recorded as a failed cell rather than aborting; the
    result keeps client-declaration order regardless of parallelism.
    """
    if not clients:
        raise ValueError("at least one coding client required")
    prompt = coding_prompt(programs)
    plan = [(client, rep) for client in clients for rep in range(repetitions)]

    def run_cell(item):
        client, rep = item
        try:
            return InterpretationCell(client.name, rep, client.generate(
                prompt.system_text, prompt.user_text, sample_index=rep))
        except ClientError as exc:
            return InterpretationCell(client.name, rep, None, error=str(exc))

    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            return list(pool.map(run_cell, plan))
    return [run_cell(item) for item in plan]


def consensus_prompt(
    task: TaskSpec,
    condition: Condition,
    interpretations: list[str],
    programs: list[str] | None = None,
) -> tuple[str, PromptPair]:
    """Select the condition-appropriate template variant and bind it.

    Direct prompting uses the no-samples variants; since those carry no
    program slot, any programs are appended to the task description as a
    fenced block.
    """
    if condition.direct_prompting:
        template_id = "direct_local" if condition.local_context else "direct"
        description = task.description
        if programs:
            description += "\n\n```prolog\n" + "\n\n".join(programs) + "\n```"
        bindings = {
            "domain_context": task.domain_context if condition.global_context else "",
            "description": description,
        }
    else:
        template_id = {
            (True, True): "consensus",
            (True, False): "consensus_no_local",
            (False, True): "consensus_no_global",
            (False, False): "consensus_no_global_no_local",
        }[(condition.global_context, condition.local_context)]
        bindings = {
            "domain_context": task.domain_context,
            "samples": "\n\n".join(interpretations),
            "description": task.description,
        }
    if condition.local_context:
        bindings["example_type"] = task.example_type
        bindings["example"] = task.example
    return template_id, render_prompt(template_id, bindings)


def summarize_consensus(
    reasoning_client: ModelClient,
    interpretations: list[str],
    task: TaskSpec,
    condition: Condition,
    programs: list[str] | None = None,
) -> str:
    """Exactly one reasoning call producing the explanation text."""
    if not interpretations and not condition.direct_prompting:
        raise ValueError("consensus requires interpretations unless direct prompting")
    _, prompt = consensus_prompt(task, condition, interpretations, programs)
    return reasoning_client.generate(prompt.system_text, prompt.user_text)


def judge_prompt(
    explanation: str,
    reference: str,
    question: str,
    instructions: str = JUDGE_INSTRUCTIONS,
) -> PromptPair:
    return render_prompt(
        "judge",
        {
            "instructions": instructions,
            "question": question,
            "answer_ref": reference,
            "answer": explanation,
        },
    )


def judge_explanation(
    judge_client: ModelClient,
    explanation: str,
    reference: str,
    repetitions: int = 1,
    question: str = "",
    instructions: str = JUDGE_INSTRUCTIONS,
) -> list[JudgeScore]:
    """One judge call per repetition; unparseable ratings stay as flagged rows
    (rating None) with the raw text kept."""
    prompt = judge_prompt(explanation, reference, question, instructions)
    scores = []
    for rep in range(repetitions):
        raw = judge_client.generate(prompt.system_text, prompt.user_text, sample_index=rep)
        try:
            rating = parse_rating(raw)
        except RatingParseError:
            rating = None
        scores.append(JudgeScore(judge_client.name, rep, rating, raw))
    return scores


def run_condition(
    task: TaskSpec,
    condition: Condition,
    coding_clients: list[ModelClient],
    reasoning_client: ModelClient,
    judge_clients: list[ModelClient],
    coding_repetitions: int = 3,
    judge_repetitions: int = 3,
    ledger: Ledger | None = None,
    parallelism: int = 1,
) -> ExplanationRun:
    """Execute one (task, condition) cell end to end, optionally journaling
    every call into the ledger keyed by request digest."""
    programs = list(task.programs)
    if condition.program_naming == "anonymized":
        programs = [anonymize_predicates(p)[0] for p in programs]
    run = ExplanationRun(condition=condition, task_id=task.task_id, programs=programs)

    if not condition.direct_prompting:
        run.interpretations = interpret_programs(
            coding_clients, programs, coding_repetitions, parallelism
        )
        if ledger is not None:
            prompt = coding_prompt(programs)
            for cell in run.interpretations:
                client = next(c for c in coding_clients if c.name == cell.client)
                key = request_digest(
                    cell.client, prompt.system_text, prompt.user_text,
                    client.settings, cell.repetition,
                )
                ledger.append(key, {
                    "type": "interpretation",
                    "condition": condition.key,
                    "task": task.task_id,
                    "client": cell.client,
                    "repetition": cell.repetition,
                    "response": cell.text,
                    "error": cell.error,
                })
        if not run.interpretation_texts():
            run.failed = True
            return run

    texts = run.interpretation_texts()
    _, prompt = consensus_prompt(
        task, condition, texts, programs if condition.direct_prompting else None
    )
    try:
        run.consensus = reasoning_client.generate(prompt.system_text, prompt.user_text)
    except ClientError:
        run.failed = True
        return run
    if ledger is not None:
        key = request_digest(
            reasoning_client.name, prompt.system_text, prompt.user_text,
            reasoning_client.settings,
        )
        ledger.append(key, {
            "type": "consensus",
            "condition": condition.key,
            "task": task.task_id,
            "client": reasoning_client.name,
            "response": run.consensus,
        })

    for judge in judge_clients:
        rows = judge_explanation(
            judge, run.consensus, task.reference, judge_repetitions, task.question
        )
        run.scores.extend(rows)
        if ledger is not None:
            jp = judge_prompt(run.consensus, task.reference, task.question)
            for row in rows:
                key = request_digest(
                    row.judge, jp.system_text, jp.user_text,
                    judge.settings, row.repetition,
                )
                ledger.append(key, {
                    "type": "judge",
                    "condition": condition.key,
                    "task": task.task_id,
                    "client": row.judge,
                    "repetition": row.repetition,
                    "response": row.raw_text,
                    "rating": row.rating,
                })
    return run


def run_lattice(
    tasks: list[TaskSpec],
    conditions: list[Condition],
    coding_clients: list[ModelClient],
    reasoning_client: ModelClient,
    judge_clients: list[ModelClient],
    coding_repetitions: int = 3,
    judge_repetitions: int = 3,
    ledger: Ledger | None = None,
    parallelism: int = 1,
) -> list[ExplanationRun]:
    runs = []
    for task in tasks:
        for condition in conditions:
            runs.append(run_condition(
                task, condition, coding_clients, reasoning_client, judge_clients,
                coding_repetitions, judge_repetitions, ledger, parallelism,
            ))
    return runs


def default_conditions() -> list[Condition]:
    """The NP/AP × GC/LC explanation lattice plus direct-prompting baselines."""
    lattice = [
        Condition(naming, gc, lc)
        for naming in ("named", "anonymized")
        for gc in (True, False)
        for lc in (True, False)
    ]
    lattice += [
        Condition("named", False, False, direct_prompting=True),
        Condition("anonymized", False, False, direct_prompting=True),
        Condition("named", True, False, direct_prompting=True),
        Condition("named", True, True, direct_prompting=True),
    ]
    return lattice


def condition_scores(ledger: Ledger) -> dict[str, list[int]]:
    """Parseable judge ratings grouped by condition key."""
    out: dict[str, list[int]] = {}
    for row in ledger.rows():
        if row["type"] == "judge" and row.get("rating") is not None:
            out.setdefault(row["condition"], []).append(row["rating"])
    return out


def top_quartile_explanations(ledger: Ledger) -> list[dict]:
    """Consensus explanations whose mean judge score lands in the top 25%,
    surfaced for manual review."""
    ratings: dict[tuple[str, str], list[int]] = {}
    consensus: dict[tuple[str, str], str] = {}
    for row in ledger.rows():
        cell = (row["condition"], row["task"])
        if row["type"] == "judge" and row.get("rating") is not None:
            ratings.setdefault(cell, []).append(row["rating"])
        elif row["type"] == "consensus":
            consensus[cell] = row["response"]
    scored = [
        {
            "condition": cond,
            "task": task,
            "mean_rating": sum(r) / len(r),
            "explanation": consensus.get((cond, task), ""),
        }
        for (cond, task), r in ratings.items()
    ]
    scored.sort(key=lambda s: (-s["mean_rating"], s["condition"], s["task"]))
    keep = max(1, -(-len(scored) // 4)) if scored else 0
    return scored[:keep]
