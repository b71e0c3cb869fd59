"""Line-delimited record formats for trial sets and response logs.

Each line is one JSON object with a ``schema`` tag. Trial items embed their
circuit as fact-format source so a trial set file is self-contained.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

from faultdx.circuit import parse_circuit, print_circuit
from faultdx.errors import FaultDxError
from faultdx.sessions import Domain, TrialItem, TrialRecord

TRIAL_ITEM_SCHEMA = "trial-item/v1"
RESPONSE_SCHEMA = "response/v1"
TRIAL_RECORD_SCHEMA = "trial-record/v1"


class RecordError(FaultDxError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def trial_item_to_dict(item: TrialItem) -> dict:
    return {
        "schema": TRIAL_ITEM_SCHEMA,
        "item_id": item.item_id,
        "domain": item.domain.value,
        "circuit": print_circuit(item.circuit),
        "options": list(item.options),
        "label_map": dict(item.label_map),
        "hypotheses": sorted(item.hypotheses),
        "escape_option": "escape",
    }


def trial_item_from_dict(data: dict, line: int = 0) -> TrialItem:
    try:
        if data.get("schema") != TRIAL_ITEM_SCHEMA:
            raise RecordError(f"unexpected schema {data.get('schema')!r}", line)
        return TrialItem(
            item_id=data["item_id"],
            domain=Domain(data["domain"]),
            circuit=parse_circuit(data["circuit"]),
            options=tuple(data["options"]),
            label_map=dict(data["label_map"]),
            hypotheses=frozenset(data["hypotheses"]),
        )
    except (KeyError, ValueError) as exc:
        raise RecordError(str(exc), line) from exc


def trial_record_to_dict(record: TrialRecord) -> dict:
    return {
        "schema": TRIAL_RECORD_SCHEMA,
        "participant": record.participant,
        "item_id": record.item_id,
        "choice": record.choice,
        "raw_entropy": record.raw_entropy,
        "normalized_score": record.normalized_score,
        "excluded": record.excluded,
        "invalid_item": record.invalid_item,
    }


def write_jsonl(path: Path | str, rows: Iterable[dict]) -> None:
    with open(path, "w") as f:
        for row in rows:
            f.write(json.dumps(row, sort_keys=True) + "\n")


def read_jsonl(path: Path | str) -> list[tuple[int, dict]]:
    out = []
    with open(path) as f:
        for i, raw in enumerate(f, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                out.append((i, json.loads(raw)))
            except json.JSONDecodeError as exc:
                raise RecordError(f"invalid JSON: {exc}", i) from exc
    return out


def write_trial_items(path: Path | str, items: Sequence[TrialItem]) -> None:
    write_jsonl(path, (trial_item_to_dict(it) for it in items))


def read_trial_items(path: Path | str) -> list[TrialItem]:
    return [trial_item_from_dict(data, line) for line, data in read_jsonl(path)]


def read_responses(path: Path | str) -> list[dict]:
    """Response log rows: {participant, item_id, choice} per line."""
    rows = []
    for line, data in read_jsonl(path):
        if data.get("schema", RESPONSE_SCHEMA) != RESPONSE_SCHEMA:
            raise RecordError(f"unexpected schema {data.get('schema')!r}", line)
        for key in ("participant", "item_id", "choice"):
            if key not in data:
                raise RecordError(f"missing field {key!r}", line)
        rows.append(data)
    return rows
