"""Multi-model explanation pipeline: template rendering, predicate
anonymization, coding-model interpretation, reasoning-model consensus, and
judge scoring."""

from faultdx.lens.anonymize import anonymize_predicates, deanonymize
from faultdx.lens.clients import (
    FixtureClient,
    GenerationSettings,
    HttpClient,
    ModelClient,
    request_digest,
    write_fixture,
)
from faultdx.lens.ledger import Ledger
from faultdx.lens.pipeline import (
    Condition,
    ExplanationRun,
    TaskSpec,
    condition_scores,
    default_conditions,
    interpret_programs,
    judge_explanation,
    load_tasks,
    parse_rating,
    run_condition,
    run_lattice,
    summarize_consensus,
    top_quartile_explanations,
)
from faultdx.lens.templates import PromptPair, render_prompt, template_ids

__all__ = [
    "anonymize_predicates",
    "deanonymize",
    "FixtureClient",
    "GenerationSettings",
    "HttpClient",
    "ModelClient",
    "request_digest",
    "write_fixture",
    "Condition",
    "ExplanationRun",
    "Ledger",
    "TaskSpec",
    "condition_scores",
    "default_conditions",
    "interpret_programs",
    "judge_explanation",
    "load_tasks",
    "parse_rating",
    "run_condition",
    "run_lattice",
    "summarize_consensus",
    "top_quartile_explanations",
    "PromptPair",
    "render_prompt",
    "template_ids",
]
