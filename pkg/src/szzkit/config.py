"""Single-file pipeline configuration (YAML key-value tree).

Every key can be overridden by a CLI flag; see the cli module for the flag
map. The tracker API token is never part of the config file or command line;
it is read from the SZZKIT_TRACKER_TOKEN environment variable.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import yaml

from .features import CouplingConfig
from .issues import IssueQuery, parse_iso8601
from .linemap import SimilarityConfig
from .linker import ReferencePattern
from .tracer import TraceConfig

TOKEN_ENV_VAR = "SZZKIT_TRACKER_TOKEN"


class ConfigError(ValueError):
    """Configuration file or flag combination is unusable."""


@dataclass(frozen=True)
class PipelineConfig:
    repo_path: str = "."
    branch: str = "master"
    cutoff: str | None = None  # ISO-8601; kept textual so configs hash stably
    tracker_url: str | None = None
    output_dir: str = "out"
    worker_count: int = 1
    query: IssueQuery = field(default_factory=lambda: IssueQuery(project="JENKINS"))
    patterns: ReferencePattern = field(default_factory=ReferencePattern)
    trace: TraceConfig = field(default_factory=TraceConfig)
    similarity: SimilarityConfig = field(default_factory=SimilarityConfig)
    coupling: CouplingConfig = field(default_factory=CouplingConfig)

    def __post_init__(self) -> None:
        if self.worker_count < 1:
            raise ConfigError("worker_count must be >= 1")
        if self.cutoff:
            try:
                parse_iso8601(self.cutoff)
            except ValueError as exc:
                raise ConfigError(f"cutoff is not ISO-8601: {self.cutoff!r}") from exc

    @property
    def cutoff_epoch(self) -> int | None:
        return parse_iso8601(self.cutoff) if self.cutoff else None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["query"]["statuses"] = list(d["query"]["statuses"])
        return d

    def digest(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        ).hexdigest()


def _build(cls, data: dict, where: str):
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def load_config(path: str | Path) -> PipelineConfig:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    nested = {}
    if "query" in data:
        q = dict(data.pop("query"))
        if "statuses" in q:
            q["statuses"] = tuple(q["statuses"])
        nested["query"] = _build(IssueQuery, q, "query")
    if "patterns" in data:
        nested["patterns"] = _build(ReferencePattern, data.pop("patterns"), "patterns")
    if "trace" in data:
        nested["trace"] = _build(TraceConfig, data.pop("trace"), "trace")
    if "similarity" in data:
        nested["similarity"] = _build(SimilarityConfig, data.pop("similarity"), "similarity")
    if "coupling" in data:
        nested["coupling"] = _build(CouplingConfig, data.pop("coupling"), "coupling")
    return _build(PipelineConfig, {**data, **nested}, str(path))


def apply_overrides(config: PipelineConfig, **overrides) -> PipelineConfig:
    """Return config with non-None override values applied."""
    updates = {}
    for name in ("repo_path", "branch", "cutoff", "tracker_url", "output_dir",
                 "worker_count"):
        value = overrides.get(name)
        if value is not None:
            updates[name] = value
    if overrides.get("depth") is not None:
        updates["trace"] = replace(config.trace, depth=overrides["depth"])
    return replace(config, **updates) if updates else config
