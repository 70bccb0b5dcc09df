"""Runtime configuration for the CLI and service."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

ENV_DB_URL = "PM_DB_URL"
ENV_REST_URL = "PM_REST_URL"


class ConfigError(Exception):
    pass


@dataclass
class Config:
    csv_dir: Path | None = None
    db_url: str | None = None
    models_dir: Path | None = None
    models_rest_url: str | None = None
    state_path: Path = Path("state.json")
    output_dir: Path = Path("out")
    activity_type_filter: set[str] = field(default_factory=set)
    service_port: int = 8337
    ui_dir: Path | None = None

    def validate(self) -> None:
        sources = [s for s in (self.csv_dir, self.db_url) if s]
        if len(sources) != 1:
            raise ConfigError("configure exactly one event-data source (source.csv_dir or source.db_url)")
        if self.models_dir and self.models_rest_url:
            raise ConfigError("configure at most one model source (models.dir or models.rest_url)")


def load_config(path: Union[str, Path], env: dict | None = None) -> Config:
    """Load config JSON; PM_DB_URL / PM_REST_URL env vars override credentials."""
    env = os.environ if env is None else env
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc

    source = doc.get("source", {})
    models = doc.get("models", {})
    base = path.parent

    def resolve(value) -> Path | None:
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else base / p

    config = Config(
        csv_dir=resolve(source.get("csv_dir")),
        db_url=env.get(ENV_DB_URL) or source.get("db_url"),
        models_dir=resolve(models.get("dir")),
        models_rest_url=env.get(ENV_REST_URL) or models.get("rest_url"),
        state_path=resolve(doc.get("state_path")) or base / "state.json",
        output_dir=resolve(doc.get("output_dir")) or base / "out",
        activity_type_filter=set(doc.get("activity_type_filter", [])),
        service_port=int(doc.get("service_port", 8337)),
        ui_dir=resolve(doc.get("ui_dir")),
    )
    config.validate()
    return config
