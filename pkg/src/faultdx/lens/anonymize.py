"""Consistent renaming of user-defined predicate names in logic programs.

Head-defined predicates (and ``inv``-prefixed invented helpers, wherever they
occur) are renamed to p1, p2, ... in order of first definition; background
predicates on the allowlist keep their names. The returned rename map inverts
the transformation byte-exactly.
"""

from __future__ import annotations

import re

from faultdx.errors import ProgramParseError

#: background-knowledge and builtin names that are never anonymized
DEFAULT_ALLOWLIST = frozenset(
    {
        "find_all",
        "findall",
        "all",
        "empty_list",
        "not_empty_list",
        "is_equal",
        "same_circuit",
        "size",
        "is_list",
        "not_list",
        "pair",
        "larger_min_size",
        "min",
        "max",
        "min_list",
        "max_list",
        "fold",
        "map",
        "empty_partition_sizes",
        "gate",
        "is_connected",
        "test_point_label",
        "lightbulb",
        "call",
        "length",
        "not",
        "is",
        "true",
        "fail",
    }
)

_ATOM = re.compile(r"[a-z][A-Za-z0-9_]*")
_HEAD = re.compile(r"^\s*([a-z][A-Za-z0-9_]*)")


def _strip_comments(text: str) -> str:
    return re.sub(r"%[^\n]*", "", text)


def _clauses(text: str) -> list[str]:
    """Split on clause-terminating dots; validates basic clause shape."""
    stripped = _strip_comments(text)
    parts = [p for p in re.split(r"\.(?:\s+|$)", stripped) if p.strip()]
    for index, clause in enumerate(parts):
        body = clause.strip()
        if _HEAD.match(body) is None:
            raise ProgramParseError(f"clause does not start with an atom: {body[:40]!r}", index)
        if body.count("(") != body.count(")"):
            raise ProgramParseError("unbalanced parentheses", index)
        if ":-" in body and not body.split(":-", 1)[1].strip():
            raise ProgramParseError("empty clause body", index)
    return parts


def anonymize_predicates(
    program_text: str,
    allowlist: frozenset[str] | None = None,
) -> tuple[str, dict[str, str]]:
    """Rename user-defined predicates to p1, p2, ...; returns the rewritten
    program and the original-name -> new-name map."""
    allow = DEFAULT_ALLOWLIST if allowlist is None else allowlist
    clauses = _clauses(program_text)

    targets: list[str] = []
    for clause in clauses:
        head = _HEAD.match(clause.strip()).group(1)
        if head not in allow and head not in targets:
            targets.append(head)
    stripped = _strip_comments(program_text)
    for m in _ATOM.finditer(stripped):
        name = m.group()
        if name.startswith("inv") and name not in allow and name not in targets:
            targets.append(name)

    existing = set(_ATOM.findall(program_text))
    mapping: dict[str, str] = {}
    counter = 1
    for name in targets:
        while f"p{counter}" in existing:
            counter += 1
        mapping[name] = f"p{counter}"
        counter += 1

    return _replace(program_text, mapping), mapping


def deanonymize(program_text: str, mapping: dict[str, str]) -> str:
    """Invert an anonymization using its rename map."""
    return _replace(program_text, {new: old for old, new in mapping.items()})


def _replace(text: str, mapping: dict[str, str]) -> str:
    if not mapping:
        return text
    pattern = re.compile(
        r"\b(" + "|".join(re.escape(n) for n in sorted(mapping, key=len, reverse=True)) + r")\b"
    )
    return pattern.sub(lambda m: mapping[m.group(1)], text)
