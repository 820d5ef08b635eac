"""Service configuration: TOML or JSON file, overridable by environment variables.

Precedence: built-in defaults < config file < ``GREEKRAG_*`` environment
variables.  ``mock_mode`` forces the offline reference embedder and stub
generator regardless of configured endpoints, which is how the UI and the
tests run with no credentials.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .embedding import DEFAULT_EMBEDDER_ID, EmbedderConfig, REFERENCE_ENDPOINT
from .pipeline import DEFAULT_GENERATOR_ID, GeneratorConfig, STUB_ENDPOINT

ENV_PREFIX = "GREEKRAG_"


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8008
    corpus_dir: str = "corpora"
    static_dir: str | None = None
    mock_mode: bool = False
    cache_path: str | None = None
    embedder_endpoint: str = REFERENCE_ENDPOINT
    embedder_id: str = DEFAULT_EMBEDDER_ID
    embedder_dim: int | None = 256
    generator_endpoint: str = STUB_ENDPOINT
    generator_id: str = DEFAULT_GENERATOR_ID
    temperature: float = 0.7

    def embedder_config(self) -> EmbedderConfig:
        endpoint = REFERENCE_ENDPOINT if self.mock_mode else self.embedder_endpoint
        return EmbedderConfig(embedder_id=self.embedder_id, dim=self.embedder_dim,
                              endpoint=endpoint)

    def generator_config(self) -> GeneratorConfig:
        endpoint = STUB_ENDPOINT if self.mock_mode else self.generator_endpoint
        return GeneratorConfig(endpoint=endpoint, generator_id=self.generator_id,
                               temperature=self.temperature)


_FIELD_PARSERS = {
    "host": str,
    "port": int,
    "corpus_dir": str,
    "static_dir": str,
    "mock_mode": lambda v: str(v).strip().lower() in {"1", "true", "yes", "on"},
    "cache_path": str,
    "embedder_endpoint": str,
    "embedder_id": str,
    "embedder_dim": int,
    "generator_endpoint": str,
    "generator_id": str,
    "temperature": float,
}


def _flatten(obj: dict) -> dict:
    """Accept both flat keys and {embedder: {...}, generator: {...}} sections."""
    flat = dict(obj)
    for section, prefix in (("embedder", "embedder"), ("generator", "generator")):
        sub = flat.pop(section, None)
        if isinstance(sub, dict):
            for key, value in sub.items():
                flat[f"{prefix}_{key}"] = value
    return flat


def load_config(path: str | Path | None = None, env: dict[str, str] | None = None) -> ServiceConfig:
    """Build a :class:`ServiceConfig` from an optional file plus the environment."""
    values: dict = {}
    if path is not None:
        path = Path(path)
        raw = path.read_bytes()
        if path.suffix.lower() == ".json":
            parsed = json.loads(raw.decode("utf-8"))
        else:
            parsed = tomllib.loads(raw.decode("utf-8"))
        for key, value in _flatten(parsed).items():
            if key not in _FIELD_PARSERS:
                raise ValueError(f"unknown config key {key!r} in {path}")
            values[key] = _FIELD_PARSERS[key](value)

    env = os.environ if env is None else env
    for key, parser in _FIELD_PARSERS.items():
        env_key = ENV_PREFIX + key.upper()
        if env_key in env:
            values[key] = parser(env[env_key])

    return replace(ServiceConfig(), **values)
