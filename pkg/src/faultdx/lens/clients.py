"""Model-client adapter boundary.

A request is (system text, user text, settings); a response is text. The
fixture client resolves requests from canned response files keyed by request
digest, which makes full pipeline runs deterministic and replayable. The HTTP
client posts the same request shape to a configured endpoint with bounded
retries.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, runtime_checkable

import httpx

from faultdx.errors import ClientError

KINDS = ("coding", "reasoning", "judging")


@dataclass(frozen=True)
class GenerationSettings:
    temperature: float = 0.0
    repetitions: int = 1


@runtime_checkable
class ModelClient(Protocol):
    name: str
    kind: str  # coding | reasoning | judging
    settings: GenerationSettings

    def generate(self, system_text: str, user_text: str, sample_index: int = 0) -> str:
        """Return one response for the prompt pair.

        ``sample_index`` distinguishes repeated draws of the same prompt so
        fixture-backed clients can store one canned response per repetition.
        """
        ...


def request_digest(
    name: str,
    system_text: str,
    user_text: str,
    settings: GenerationSettings,
    sample_index: int = 0,
) -> str:
    payload = json.dumps(
        {
            "model": name,
            "system": system_text,
            "user": user_text,
            "temperature": settings.temperature,
            "sample_index": sample_index,
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()


class FixtureClient:
    """Deterministic client reading canned responses from a directory."""

    def __init__(
        self,
        name: str,
        kind: str,
        fixture_dir: Path | str,
        settings: GenerationSettings = GenerationSettings(),
    ):
        if kind not in KINDS:
            raise ClientError(f"unknown client kind {kind!r}")
        self.name = name
        self.kind = kind
        self.fixture_dir = Path(fixture_dir)
        self.settings = settings

    def generate(self, system_text: str, user_text: str, sample_index: int = 0) -> str:
        digest = request_digest(self.name, system_text, user_text, self.settings, sample_index)
        path = self.fixture_dir / f"{digest}.txt"
        if not path.exists():
            raise ClientError(
                f"no fixture for {self.name} request {digest[:12]}… in {self.fixture_dir}"
            )
        return path.read_text()


def write_fixture(
    fixture_dir: Path | str,
    client: ModelClient,
    system_text: str,
    user_text: str,
    response: str,
    sample_index: int = 0,
) -> Path:
    """Store a canned response where a FixtureClient will find it."""
    digest = request_digest(
        client.name, system_text, user_text, client.settings, sample_index
    )
    path = Path(fixture_dir) / f"{digest}.txt"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(response)
    return path


class HttpClient:
    """Thin adapter posting {system, user, temperature} to an HTTP endpoint
    returning {"text": ...}; explicitly nondeterministic."""

    def __init__(
        self,
        name: str,
        kind: str,
        endpoint: str,
        settings: GenerationSettings = GenerationSettings(),
        api_key: str | None = None,
        max_retries: int = 3,
        backoff_seconds: float = 1.0,
        timeout: float = 120.0,
    ):
        if kind not in KINDS:
            raise ClientError(f"unknown client kind {kind!r}")
        self.name = name
        self.kind = kind
        self.endpoint = endpoint
        self.settings = settings
        self.api_key = api_key
        self.max_retries = max_retries
        self.backoff_seconds = backoff_seconds
        self.timeout = timeout

    def generate(self, system_text: str, user_text: str, sample_index: int = 0) -> str:
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": self.name,
            "system": system_text,
            "user": user_text,
            "temperature": self.settings.temperature,
        }
        last_error: Exception | None = None
        for attempt in range(self.max_retries):
            try:
                response = httpx.post(
                    self.endpoint, json=body, headers=headers, timeout=self.timeout
                )
                response.raise_for_status()
                return response.json()["text"]
            except (httpx.HTTPError, KeyError, ValueError) as exc:
                last_error = exc
                if attempt + 1 < self.max_retries:
                    time.sleep(self.backoff_seconds * 2**attempt)
        raise ClientError(
            f"client {self.name} failed after {self.max_retries} attempts: {last_error}"
        )
