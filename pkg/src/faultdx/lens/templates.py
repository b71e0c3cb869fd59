"""Prompt templates, shipped verbatim as text assets and rendered by exact
placeholder substitution."""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from importlib import resources

from faultdx.errors import TemplateError

_PLACEHOLDER = re.compile(r"\{([a-z_]+)\}")

# template id -> (system asset, user asset)
_REGISTRY = {
    "coding": ("coding_system.txt", "coding_user.txt"),
    "consensus": ("reasoning_system.txt", "reasoning_user.txt"),
    "consensus_no_global": ("reasoning_system_no_gc.txt", "reasoning_user.txt"),
    "consensus_no_local": ("reasoning_system.txt", "reasoning_user_no_lc.txt"),
    "consensus_no_global_no_local": (
        "reasoning_system_no_gc.txt",
        "reasoning_user_no_lc.txt",
    ),
    "direct": ("reasoning_system_direct.txt", "reasoning_user_direct.txt"),
    "direct_local": ("reasoning_system_direct.txt", "reasoning_user_direct_lc.txt"),
    "judge": ("judge_system.txt", "judge_user.txt"),
}


@dataclass(frozen=True)
class PromptPair:
    system_text: str
    user_text: str


def template_ids() -> list[str]:
    return sorted(_REGISTRY)


@functools.lru_cache(maxsize=None)
def template_text(asset: str) -> str:
    path = resources.files("faultdx") / "assets" / "templates" / asset
    return path.read_text()


def placeholders(template_id: str) -> set[str]:
    system, user = _template_pair(template_id)
    return set(_PLACEHOLDER.findall(system)) | set(_PLACEHOLDER.findall(user))


def _template_pair(template_id: str) -> tuple[str, str]:
    try:
        system_asset, user_asset = _REGISTRY[template_id]
    except KeyError:
        raise TemplateError(f"unknown template {template_id!r}") from None
    return template_text(system_asset), template_text(user_asset)


def _substitute(text: str, bindings: dict[str, str]) -> str:
    missing = sorted(set(_PLACEHOLDER.findall(text)) - set(bindings))
    if missing:
        raise TemplateError(f"missing bindings: {', '.join(missing)}")
    return _PLACEHOLDER.sub(lambda m: bindings[m.group(1)], text)


def render_prompt(template_id: str, bindings: dict[str, str]) -> PromptPair:
    """Byte-exact substitution of ``{placeholder}`` tokens into the shipped
    template pair; every placeholder must be bound."""
    system, user = _template_pair(template_id)
    return PromptPair(
        system_text=_substitute(system, bindings),
        user_text=_substitute(user, bindings),
    )
