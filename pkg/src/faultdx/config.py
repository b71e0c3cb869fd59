"""Application configuration: a single TOML file validated at load time.

Unknown keys are rejected so typos fail fast. API keys are never stored in the
file; each client block names an environment variable instead.
"""

from __future__ import annotations

import os
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from pydantic import BaseModel, ConfigDict, Field, field_validator

from faultdx.errors import FaultDxError
from faultdx.lens.clients import (
    KINDS,
    FixtureClient,
    GenerationSettings,
    HttpClient,
    ModelClient,
)


class ConfigError(FaultDxError):
    pass


class ClientSpec(BaseModel):
    """One model endpoint: either a live HTTP endpoint or a fixture directory."""

    model_config = ConfigDict(extra="forbid")

    name: str
    kind: str
    endpoint: str | None = None
    fixture_dir: str | None = None
    temperature: float | None = None
    repetitions: int = Field(default=1, ge=1)
    api_key_env: str | None = None

    @field_validator("kind")
    @classmethod
    def _known_kind(cls, value):
        if value not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        return value

    def default_temperature(self) -> float:
        # creative sampling for code interpretation, deterministic elsewhere
        return 0.8 if self.kind == "coding" else 0.0


class AppConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    data_dir: str = "data"
    seed: int = 0
    parallelism: int = Field(default=1, ge=1)
    mwu_exact_threshold: int = Field(default=8, ge=1)
    anonymize_allowlist: list[str] | None = None
    clients: list[ClientSpec] = Field(default_factory=list)

    def build_clients(self) -> list[ModelClient]:
        return [build_client(spec) for spec in self.clients]

    def clients_of_kind(self, kind: str) -> list[ModelClient]:
        return [build_client(s) for s in self.clients if s.kind == kind]


def build_client(spec: ClientSpec) -> ModelClient:
    settings = GenerationSettings(
        temperature=spec.temperature if spec.temperature is not None
        else spec.default_temperature(),
        repetitions=spec.repetitions,
    )
    if spec.fixture_dir is not None:
        return FixtureClient(spec.name, spec.kind, spec.fixture_dir, settings)
    if spec.endpoint is None:
        raise ConfigError(f"client {spec.name!r} needs an endpoint or fixture_dir")
    api_key = os.environ.get(spec.api_key_env) if spec.api_key_env else None
    return HttpClient(spec.name, spec.kind, spec.endpoint, settings, api_key=api_key)


def load_config(path: str | Path | None = None) -> AppConfig:
    """Parse and validate a TOML config file; None yields the defaults."""
    if path is None:
        return AppConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "rb") as f:
            raw = tomllib.load(f)
        return AppConfig(**raw)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"invalid config in {path}: {exc}") from exc
