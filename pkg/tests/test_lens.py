import json
from pathlib import Path

import pytest

from faultdx.errors import ClientError, RatingParseError, TemplateError
from faultdx.lens import (
    Condition,
    FixtureClient,
    GenerationSettings,
    Ledger,
    anonymize_predicates,
    condition_scores,
    deanonymize,
    interpret_programs,
    judge_explanation,
    load_tasks,
    parse_rating,
    render_prompt,
    run_condition,
    run_lattice,
    summarize_consensus,
    template_ids,
    top_quartile_explanations,
)
from faultdx.lens.clients import request_digest, write_fixture
from faultdx.lens.pipeline import (
    coding_prompt,
    consensus_prompt,
    default_conditions,
    judge_prompt,
)

GOLDEN_DIR = Path(__file__).parent / "goldens"


# --- templates ---------------------------------------------------------------


def test_template_ids_complete():
    assert set(template_ids()) == {
        "coding",
        "consensus",
        "consensus_no_global",
        "consensus_no_local",
        "consensus_no_global_no_local",
        "direct",
        "direct_local",
        "judge",
    }


def test_coding_prompt_fences_program():
    pair = render_prompt("coding", {"prolog": "a."})
    assert "```prolog\na.\n```" in pair.user_text
    assert "Explain it to someone" in pair.user_text


def test_judge_prompt_has_reference_markers():
    pair = judge_prompt("ans", "ref", "q?")
    assert "[The Start of Reference Answer]" in pair.user_text
    assert "ref" in pair.user_text
    assert 'for example: "Rating: [[5]]"' in pair.system_text


def test_missing_binding_is_named():
    with pytest.raises(TemplateError, match="samples"):
        render_prompt("consensus", {"domain_context": "x", "description": "d",
                                    "example_type": "t", "example": "e"})


def test_unknown_template_rejected():
    with pytest.raises(TemplateError):
        render_prompt("nope", {})


def test_no_unresolved_placeholders_after_render():
    pair = render_prompt(
        "consensus",
        {"domain_context": "d", "samples": "s", "description": "x",
         "example_type": "t", "example": "e"},
    )
    assert "{" not in pair.system_text and "{" not in pair.user_text


# --- condition -> template routing ------------------------------------------


@pytest.fixture(scope="module")
def tasks():
    return load_tasks()


def test_gc_condition_includes_domain_introduction(tasks):
    task = tasks["circuit_task_1"]
    _, pair = consensus_prompt(task, Condition("named", True, True), ["i1"])
    assert "[Task Domain Introduction]" in pair.system_text
    assert task.domain_context in pair.system_text
    assert "[Sample Explanations]" in pair.system_text


def test_no_gc_condition_drops_domain_introduction(tasks):
    _, pair = consensus_prompt(
        tasks["circuit_task_1"], Condition("named", False, True), ["i1"]
    )
    assert "[Task Domain Introduction]" not in pair.system_text
    assert "[Sample Explanations]" in pair.system_text


def test_no_lc_condition_drops_example(tasks):
    tid, pair = consensus_prompt(
        tasks["circuit_task_1"], Condition("named", True, False), ["i1"]
    )
    assert tid == "consensus_no_local"
    assert "[Example]" not in pair.user_text


def test_direct_condition_uses_no_samples_variant(tasks):
    tid, pair = consensus_prompt(
        tasks["circuit_task_1"],
        Condition("named", True, False, direct_prompting=True),
        [],
    )
    assert tid == "direct"
    assert "no technical background" in pair.system_text
    assert "Sample Explanations" not in pair.system_text


def test_samples_concatenated_in_order(tasks):
    _, pair = consensus_prompt(
        tasks["circuit_task_1"], Condition("named", True, True), ["first", "second"]
    )
    assert pair.system_text.index("first") < pair.system_text.index("second")


def test_condition_keys():
    assert Condition("named", True, True).key == "np+gc+lc"
    assert Condition("anonymized", False, False).key == "ap"
    assert Condition("named", True, False, direct_prompting=True).key == "direct+np+gc"
    with pytest.raises(ValueError):
        Condition("scrambled", True, True)


def test_default_conditions_cover_lattice_and_direct_baselines():
    conditions = default_conditions()
    keys = [c.key for c in conditions]
    assert len(keys) == len(set(keys)) == 12
    assert {"np+gc+lc", "ap+gc+lc", "np", "ap", "direct+np", "direct+ap"} <= set(keys)


# --- golden prompt files -----------------------------------------------------


def golden_cases(tasks):
    task = tasks["circuit_task_1"]
    yield "coding_named", coding_prompt(list(task.programs))
    yield "consensus_np_gc_lc", consensus_prompt(
        task, Condition("named", True, True), ["alpha interpretation", "beta interpretation"]
    )[1]
    yield "consensus_ap_plain", consensus_prompt(
        task, Condition("anonymized", False, False), ["alpha interpretation"]
    )[1]
    yield "direct_np_gc_lc", consensus_prompt(
        task, Condition("named", True, True, direct_prompting=True), [], list(task.programs)
    )[1]
    yield "judge_task_1", judge_prompt("a sample explanation", task.reference, task.question)


def test_prompts_match_golden_files(tasks):
    for name, pair in golden_cases(tasks):
        expected = (GOLDEN_DIR / f"{name}.txt").read_text()
        rendered = pair.system_text + "\n=====\n" + pair.user_text
        assert rendered == expected, f"golden mismatch for {name}"


# --- anonymization -----------------------------------------------------------


def test_anonymize_spec_example():
    text, mapping = anonymize_predicates(
        "exclusively_powers(A,B) :- is_connected(A,B)."
    )
    assert text == "p1(A,B) :- is_connected(A,B)."
    assert mapping == {"exclusively_powers": "p1"}


def test_anonymize_empty_program():
    assert anonymize_predicates("") == ("", {})


def test_anonymize_mutual_recursion_consistent():
    program = "even(0). even(N) :- succ(M, N), odd(M). odd(N) :- succ(M, N), even(M)."
    text, mapping = anonymize_predicates(program, allowlist=frozenset({"succ"}))
    assert mapping == {"even": "p1", "odd": "p2"}
    assert text.count("p1") == 3 and text.count("p2") == 2
    assert "even" not in text and "odd" not in text


def test_anonymize_inv_predicates_renamed():
    program = "top(A) :- inv_helper(A). inv_helper(A) :- gate(A)."
    text, mapping = anonymize_predicates(program)
    assert "inv_helper" in mapping
    assert "inv_helper" not in text
    assert "gate(A)" in text


def test_anonymize_skips_taken_names():
    program = "p1(A) :- gate(A). mine(A) :- p1(A)."
    _, mapping = anonymize_predicates(program, allowlist=frozenset({"gate", "p1"}))
    assert mapping == {"mine": "p2"}


def test_round_trip_all_shipped_episodes(tasks):
    programs = {p for task in tasks.values() for p in task.programs}
    assert len(programs) == 5
    for program in programs:
        text, mapping = anonymize_predicates(program)
        assert deanonymize(text, mapping) == program
        for original in mapping:
            assert original not in text


# --- rating parsing ----------------------------------------------------------


@pytest.mark.parametrize(
    "text,expected",
    [
        ("The answer is good.\nRating: [[5]]", 5),
        ("Rating: [[3]] ... on reflection ... Rating: [[8]]", 8),
        ("Rating: [[10]]", 10),
        ("Rating:  [[1]]", 1),
    ],
)
def test_parse_rating(text, expected):
    assert parse_rating(text) == expected


@pytest.mark.parametrize("text", ["no verdict here", "Rating: [[11]]", "Rating: [[0]]", "Rating: [5]"])
def test_parse_rating_rejects(text):
    with pytest.raises(RatingParseError):
        parse_rating(text)


# --- fixture-backed pipeline -------------------------------------------------


def make_clients(fixture_dir):
    coding = [
        FixtureClient(f"coder-{i}", "coding", fixture_dir,
                      GenerationSettings(temperature=0.8))
        for i in (1, 2)
    ]
    reasoning = FixtureClient("reasoner", "reasoning", fixture_dir)
    judges = [FixtureClient(f"judge-{i}", "judging", fixture_dir) for i in (1, 2, 3)]
    return coding, reasoning, judges


def seed_fixtures(fixture_dir, task, conditions, coding_reps=3, judge_reps=3):
    """Precompute every prompt in the plan and store a canned response."""
    coding, reasoning, judges = make_clients(fixture_dir)
    for condition in conditions:
        programs = list(task.programs)
        if condition.program_naming == "anonymized":
            programs = [anonymize_predicates(p)[0] for p in programs]
        interpretations = []
        if not condition.direct_prompting:
            pair = coding_prompt(programs)
            for client in coding:
                for rep in range(coding_reps):
                    # the coding prompt depends only on the program text, so
                    # the canned response must not vary with the full condition
                    response = (f"{client.name} rep {rep} on "
                                f"{condition.program_naming}: the rules pick gates.")
                    write_fixture(fixture_dir, client, pair.system_text,
                                  pair.user_text, response, rep)
                    interpretations.append(response)
        _, pair = consensus_prompt(
            task, condition, interpretations,
            programs if condition.direct_prompting else None,
        )
        consensus = f"consensus for {condition.key}"
        write_fixture(fixture_dir, reasoning, pair.system_text, pair.user_text, consensus)
        jp = judge_prompt(consensus, task.reference, task.question)
        for j, judge in enumerate(judges):
            for rep in range(judge_reps):
                rating = (j + rep) % 10 + 1
                write_fixture(
                    fixture_dir, judge, jp.system_text, jp.user_text,
                    f"Looks fine.\nRating: [[{rating}]]", rep,
                )
    return coding, reasoning, judges


def test_single_condition_row_counts(tmp_path, tasks):
    task = tasks["circuit_task_1"]
    condition = Condition("named", True, True)
    coding, reasoning, judges = seed_fixtures(tmp_path / "fx", task, [condition])
    ledger = Ledger(tmp_path / "ledger.jsonl")
    run = run_condition(task, condition, coding, reasoning, judges, ledger=ledger)
    assert not run.failed
    rows = list(ledger.rows())
    by_type = {t: sum(1 for r in rows if r["type"] == t)
               for t in ("interpretation", "consensus", "judge")}
    assert by_type == {"interpretation": 6, "consensus": 1, "judge": 9}
    assert len(run.scores) == 9 and all(s.rating in range(1, 11) for s in run.scores)


def test_lattice_ledger_byte_identical_across_runs(tmp_path, tasks):
    task = tasks["circuit_task_1"]
    conditions = [
        Condition(naming, gc, lc)
        for naming in ("named", "anonymized")
        for gc in (True, False)
        for lc in (True, False)
    ]
    coding, reasoning, judges = seed_fixtures(tmp_path / "fx", task, conditions)

    paths = []
    for run_index in (1, 2):
        path = tmp_path / f"ledger_{run_index}.jsonl"
        ledger = Ledger(path)
        runs = run_lattice([task], conditions, coding, reasoning, judges,
                           ledger=ledger, parallelism=4)
        assert all(not r.failed for r in runs)
        paths.append(path)
    assert paths[0].read_bytes() == paths[1].read_bytes()

    # resume on the same file appends nothing
    before = paths[0].read_bytes()
    run_lattice([task], conditions, coding, reasoning, judges, ledger=Ledger(paths[0]))
    assert paths[0].read_bytes() == before


def test_every_judge_row_rederivable(tmp_path, tasks):
    task = tasks["circuit_task_2"]
    condition = Condition("anonymized", True, False)
    coding, reasoning, judges = seed_fixtures(tmp_path / "fx", task, [condition])
    ledger = Ledger(tmp_path / "ledger.jsonl")
    run_condition(task, condition, coding, reasoning, judges, ledger=ledger)
    judge_rows = [r for r in ledger.rows() if r["type"] == "judge"]
    assert judge_rows
    for row in judge_rows:
        assert parse_rating(row["response"]) == row["rating"]


def test_failed_cells_recorded_and_run_proceeds(tmp_path, tasks):
    task = tasks["circuit_task_1"]
    condition = Condition("named", True, True)
    coding, reasoning, judges = seed_fixtures(tmp_path / "fx", task, [condition])
    broken = FixtureClient("offline", "coding", tmp_path / "empty")
    run = run_condition(task, condition, coding + [broken], reasoning, judges,
                        ledger=Ledger(tmp_path / "ledger.jsonl"))
    failed = [c for c in run.interpretations if c.error is not None]
    assert len(failed) == 3 and all(c.client == "offline" for c in failed)
    assert not run.failed and run.consensus is not None


def test_all_interpretations_failing_marks_run_failed(tmp_path, tasks):
    task = tasks["circuit_task_1"]
    broken = FixtureClient("offline", "coding", tmp_path / "empty")
    run = run_condition(task, Condition("named", True, True), [broken],
                        FixtureClient("reasoner", "reasoning", tmp_path / "empty"),
                        [])
    assert run.failed and run.consensus is None


def test_summarize_requires_interpretations_unless_direct(tmp_path, tasks):
    reasoning = FixtureClient("reasoner", "reasoning", tmp_path)
    with pytest.raises(ValueError):
        summarize_consensus(reasoning, [], tasks["circuit_task_1"],
                            Condition("named", True, True))


def test_judge_unparseable_rating_flagged(tmp_path, tasks):
    task = tasks["circuit_task_1"]
    judge = FixtureClient("judge-x", "judging", tmp_path)
    jp = judge_prompt("expl", task.reference, task.question)
    write_fixture(tmp_path, judge, jp.system_text, jp.user_text, "I abstain.", 0)
    rows = judge_explanation(judge, "expl", task.reference, 1, task.question)
    assert rows[0].rating is None and rows[0].raw_text == "I abstain."


def test_report_helpers(tmp_path, tasks):
    task = tasks["circuit_task_1"]
    conditions = [Condition("named", True, True), Condition("anonymized", True, True)]
    coding, reasoning, judges = seed_fixtures(tmp_path / "fx", task, conditions)
    ledger = Ledger(tmp_path / "ledger.jsonl")
    run_lattice([task], conditions, coding, reasoning, judges, ledger=ledger)
    scores = condition_scores(ledger)
    assert set(scores) == {"np+gc+lc", "ap+gc+lc"}
    assert all(len(v) == 9 for v in scores.values())
    top = top_quartile_explanations(ledger)
    assert len(top) == 1 and top[0]["explanation"].startswith("consensus for")


def test_fixture_client_missing_fixture_raises(tmp_path):
    client = FixtureClient("c", "coding", tmp_path)
    with pytest.raises(ClientError):
        client.generate("s", "u")


def test_request_digest_sensitivity():
    s = GenerationSettings()
    base = request_digest("m", "sys", "usr", s, 0)
    assert base != request_digest("m", "sys", "usr", s, 1)
    assert base != request_digest("m2", "sys", "usr", s, 0)
    assert base != request_digest("m", "sys", "usr", GenerationSettings(0.8), 0)
    assert base == request_digest("m", "sys", "usr", GenerationSettings(), 0)


def test_interpret_programs_parallel_order_stable(tmp_path, tasks):
    task = tasks["circuit_task_1"]
    condition = Condition("named", True, True)
    coding, _, _ = seed_fixtures(tmp_path / "fx", task, [condition])
    sequential = interpret_programs(coding, list(task.programs), 3, parallelism=1)
    parallel = interpret_programs(coding, list(task.programs), 3, parallelism=4)
    assert [(c.client, c.repetition, c.text) for c in sequential] == [
        (c.client, c.repetition, c.text) for c in parallel
    ]
