"""Command-line entry points.

``analyze`` and ``simulate`` are thin clients over the HTTP API, exercised
in-process so the CLI and the service can never disagree. ``study`` wraps the
trial scoring/statistics operations over record files, ``lens`` drives the
explanation pipeline, and ``serve`` runs the HTTP service.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from faultdx.config import AppConfig, ConfigError, load_config
from faultdx.errors import FaultDxError
from faultdx.records import (
    RecordError,
    read_responses,
    read_trial_items,
    trial_record_to_dict,
    write_jsonl,
    write_trial_items,
)
from faultdx.sessions import comprehension_effect, random_baseline, score_response
from faultdx.stats import one_way_anova, tukey_hsd
from faultdx.study import trial_items


def _api_client(config: AppConfig):
    """In-process client against the HTTP app, so CLI and service share one
    code path without opening a socket."""
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from faultdx.api import create_app

    return TestClient(create_app(config))


def _emit(data, fmt: str):
    if fmt == "json":
        click.echo(json.dumps(data, indent=2, sort_keys=True))
    elif fmt == "lines":
        rows = data if isinstance(data, list) else [data]
        for row in rows:
            click.echo(json.dumps(row, sort_keys=True))
    else:
        _emit_text(data)


def _emit_text(data, indent=""):
    if isinstance(data, dict):
        for key, value in data.items():
            if isinstance(value, (dict, list)):
                click.echo(f"{indent}{key}:")
                _emit_text(value, indent + "  ")
            else:
                click.echo(f"{indent}{key}: {value}")
    elif isinstance(data, list):
        for value in data:
            _emit_text(value, indent)
            if isinstance(value, dict):
                click.echo()
    else:
        click.echo(f"{indent}{data}")


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="TOML config file.")
@click.option("--seed", type=int, default=None, help="Override the configured seed.")
@click.option("--format", "fmt", type=click.Choice(["text", "json", "lines"]),
              default="text", show_default=True)
@click.pass_context
def main(ctx, config_path, seed, fmt):
    """Fault-diagnosis strategy toolkit: circuit analysis, study scoring, and
    the explanation pipeline."""
    try:
        config = load_config(config_path)
    except ConfigError as exc:
        raise click.ClickException(str(exc))
    if seed is not None:
        config = config.model_copy(update={"seed": seed})
    ctx.obj = {"config": config, "fmt": fmt}


def _post_or_fail(client, url, body):
    response = client.post(url, json=body)
    if response.status_code != 200:
        detail = response.json().get("detail", response.text)
        click.echo(f"error: {detail}", err=True)
        sys.exit(2)
    return response.json()


@main.command()
@click.argument("circuit_file", type=click.Path(exists=True))
@click.pass_context
def analyze(ctx, circuit_file):
    """Evaluate every test point of a circuit and report the optimal test."""
    facts = Path(circuit_file).read_text()
    with _api_client(ctx.obj["config"]) as client:
        report = _post_or_fail(client, "/analyze", {"facts": facts})
    if ctx.obj["fmt"] == "lines":
        _emit(report["tests"] + [{"optimal": report["optimal"]}], "lines")
    else:
        _emit(report, ctx.obj["fmt"])


@main.command()
@click.argument("circuit_file", type=click.Path(exists=True))
@click.option("--fault", type=int, required=True, help="The faulty gate.")
@click.option("--test", default=None, help="Test point to inject power at.")
@click.pass_context
def simulate(ctx, circuit_file, fault, test):
    """Simulate a circuit under a fault, optionally with an injected test."""
    facts = Path(circuit_file).read_text()
    body = {"facts": facts, "fault": fault, "test": test}
    with _api_client(ctx.obj["config"]) as client:
        _emit(_post_or_fail(client, "/simulate", body), ctx.obj["fmt"])


@main.group()
def study():
    """Trial scoring, the random baseline, and group statistics."""


def _load_items(ctx, items_path):
    if items_path is None:
        return trial_items(ctx.obj["config"].seed)
    return read_trial_items(items_path)


@study.command()
@click.argument("responses_file", type=click.Path(exists=True))
@click.option("--items", "items_path", type=click.Path(exists=True), default=None,
              help="Trial item file; defaults to the built-in 15-item set.")
@click.option("--out", type=click.Path(), default=None,
              help="Also write the records as JSONL.")
@click.pass_context
def score(ctx, responses_file, items_path, out):
    """Score a response log into normalized trial records."""
    try:
        items = {i.item_id: i for i in _load_items(ctx, items_path)}
        responses = read_responses(responses_file)
    except (RecordError, FaultDxError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    records = []
    for response in responses:
        item = items.get(response["item_id"])
        if item is None:
            click.echo(f"error: unknown item {response['item_id']!r}", err=True)
            sys.exit(2)
        records.append(score_response(item, response["choice"], response["participant"]))
    rows = [trial_record_to_dict(r) for r in records]
    if out:
        write_jsonl(out, rows)
    excluded = sum(1 for r in records if r.excluded)
    _emit({"records": rows, "scored": len(rows) - excluded, "excluded": excluded},
          ctx.obj["fmt"])


@study.command()
@click.option("--items", "items_path", type=click.Path(exists=True), default=None)
@click.option("--samples", type=int, default=100, show_default=True,
              help="Random responders per item.")
@click.option("--export-items", type=click.Path(), default=None,
              help="Write the item set used, for reuse with `study score`.")
@click.pass_context
def baseline(ctx, items_path, samples, export_items):
    """Normalized scores of uniform random responders over the item set."""
    items = _load_items(ctx, items_path)
    if export_items:
        write_trial_items(export_items, items)
    scores = random_baseline(items, samples, ctx.obj["config"].seed)
    _emit({
        "samples": len(scores),
        "mean": sum(scores) / len(scores),
        "scores": scores,
    }, ctx.obj["fmt"])


@study.command()
@click.argument("self_records", type=click.Path(exists=True))
@click.argument("explained_records", type=click.Path(exists=True))
@click.pass_context
def stats(ctx, self_records, explained_records):
    """Comprehension effect between two trial-record files (self-learning vs
    machine-explained), with a two-sided Mann-Whitney U test."""
    from faultdx.records import read_jsonl

    def load(path):
        scores = []
        for line, row in read_jsonl(path):
            if row.get("excluded"):
                continue
            value = row.get("normalized_score")
            if value is None:
                raise RecordError("record without normalized_score", line)
            scores.append(float(value))
        if not scores:
            raise RecordError(f"no scored records in {path}", 0)
        return scores

    try:
        report = comprehension_effect(load(self_records), load(explained_records))
    except (RecordError, FaultDxError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    _emit({
        "mean_self": report.mean_self,
        "mean_explained": report.mean_explained,
        "effect": report.effect,
        "u_statistic": report.u_statistic,
        "p_value": report.p_value,
        "cles": report.cles,
        "mwu_method": report.mwu_method,
    }, ctx.obj["fmt"])


@main.group()
def lens():
    """Explanation pipeline: run the condition lattice, judge, and report."""


def _ledger_path(config: AppConfig) -> Path:
    return Path(config.data_dir) / "lens_ledger.jsonl"


@lens.command()
@click.option("--tasks", "task_ids", multiple=True,
              help="Task ids to run; defaults to all shipped tasks.")
@click.option("--coding-reps", type=int, default=3, show_default=True)
@click.option("--judge-reps", type=int, default=3, show_default=True)
@click.pass_context
def run(ctx, task_ids, coding_reps, judge_reps):
    """Execute the full condition lattice, journaling into the run ledger."""
    from faultdx.lens import Ledger, default_conditions, load_tasks, run_lattice

    config = ctx.obj["config"]
    coding = config.clients_of_kind("coding")
    reasoning = config.clients_of_kind("reasoning")
    judges = config.clients_of_kind("judging")
    if not (coding and reasoning and judges):
        click.echo("error: config must define coding, reasoning and judging clients",
                   err=True)
        sys.exit(2)
    all_tasks = load_tasks()
    selected = list(task_ids) or sorted(all_tasks)
    unknown = [t for t in selected if t not in all_tasks]
    if unknown:
        click.echo(f"error: unknown tasks {unknown}", err=True)
        sys.exit(2)
    ledger = Ledger(_ledger_path(config))
    runs = run_lattice(
        [all_tasks[t] for t in selected], default_conditions(),
        coding, reasoning[0], judges,
        coding_repetitions=coding_reps, judge_repetitions=judge_reps,
        ledger=ledger, parallelism=config.parallelism,
    )
    failed = [f"{r.task_id}/{r.condition.key}" for r in runs if r.failed]
    _emit({
        "ledger": str(ledger.path),
        "runs": len(runs),
        "failed": failed,
        "rows": sum(1 for _ in ledger.rows()),
    }, ctx.obj["fmt"])


@lens.command()
@click.argument("explanation_file", type=click.Path(exists=True))
@click.option("--task", "task_id", required=True, help="Task id for the reference answer.")
@click.option("--repetitions", type=int, default=3, show_default=True)
@click.pass_context
def judge(ctx, explanation_file, task_id, repetitions):
    """Judge one explanation text against a shipped reference answer."""
    from faultdx.lens import judge_explanation, load_tasks

    config = ctx.obj["config"]
    judges = config.clients_of_kind("judging")
    if not judges:
        click.echo("error: config defines no judging clients", err=True)
        sys.exit(2)
    tasks = load_tasks()
    if task_id not in tasks:
        click.echo(f"error: unknown task {task_id!r}", err=True)
        sys.exit(2)
    task = tasks[task_id]
    explanation = Path(explanation_file).read_text()
    rows = []
    for judge_client in judges:
        for score_row in judge_explanation(
            judge_client, explanation, task.reference, repetitions, task.question
        ):
            rows.append({
                "judge": score_row.judge,
                "repetition": score_row.repetition,
                "rating": score_row.rating,
            })
    rated = [r["rating"] for r in rows if r["rating"] is not None]
    _emit({
        "scores": rows,
        "mean_rating": sum(rated) / len(rated) if rated else None,
        "unparseable": len(rows) - len(rated),
    }, ctx.obj["fmt"])


@lens.command()
@click.pass_context
def report(ctx):
    """Per-condition summaries, ANOVA/Tukey tables, and the top-quartile
    explanation list from the run ledger."""
    from faultdx.lens import Ledger, condition_scores, top_quartile_explanations

    config = ctx.obj["config"]
    path = _ledger_path(config)
    if not path.exists():
        click.echo(f"error: no ledger at {path}", err=True)
        sys.exit(2)
    ledger = Ledger(path)
    scores = condition_scores(ledger)
    summary = {
        cond: {"n": len(vals), "mean": sum(vals) / len(vals)}
        for cond, vals in sorted(scores.items())
    }
    out = {"conditions": summary}
    eligible = {c: v for c, v in scores.items() if len(v) >= 2}
    if len(eligible) >= 2:
        names = sorted(eligible)
        groups = [eligible[n] for n in names]
        anova = one_way_anova(groups)
        out["anova"] = {"f": anova.f, "p_value": anova.p_value}
        out["tukey"] = [
            {"pair": [names[c.group_a], names[c.group_b]], "q": c.q,
             "critical": c.critical, "significant": c.significant}
            for c in tukey_hsd(groups)
        ]
    out["top_quartile"] = top_quartile_explanations(ledger)
    _emit(out, ctx.obj["fmt"])


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.pass_context
def serve(ctx, host, port):
    """Run the HTTP JSON API."""
    import uvicorn

    from faultdx.api import create_app

    uvicorn.run(create_app(ctx.obj["config"]), host=host, port=port)


if __name__ == "__main__":
    main()
