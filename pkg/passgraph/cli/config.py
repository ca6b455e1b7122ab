"""
RunConfig: every section of ``config.yaml`` as a frozen dataclass.

Unknown keys are rejected with their dotted path; each section's
``validate()`` errors are re-raised with the section prefix.
"""

import dataclasses
import os
import types
import typing
from dataclasses import dataclass, field, fields, is_dataclass, replace
from pathlib import Path

import yaml

from passgraph.core.state import PitchSpec
from passgraph.graph.geometry import GeometryConfig
from passgraph.model.mpnn import MpnnConfig
from passgraph.reports.bench import BenchConfig
from passgraph.reports.post_game import ReportConfig
from passgraph.synthetic.generator import GeneratorConfig
from passgraph.training.search import SearchSpace
from passgraph.training.trainer import TrainConfig
from passgraph.utils.errors import ConfigError, InvalidState, MissingPathError
from passgraph.utils.logger_utils import setup_logger

logger = setup_logger(__name__)


@dataclass(frozen=True)
class PathsConfig:
    runs_dir: str = field(default_factory=lambda: os.getenv("PASSGRAPH_RUNS_DIR", "runs"))
    data: str | None = None
    model: str | None = None
    predictions: str | None = None

    def validate(self) -> "PathsConfig":
        if not self.runs_dir:
            raise ConfigError("runs_dir", "must not be empty")
        return self


@dataclass(frozen=True)
class PipelineConfig:
    run_generate: bool = True
    run_train: bool = True
    run_eval: bool = True
    run_report: bool = True
    run_bench: bool = False
    run_search: bool = False

    def validate(self) -> "PipelineConfig":
        return self


SECTIONS = {
    "geometry": GeometryConfig,
    "model": MpnnConfig,
    "training": TrainConfig,
    "search": SearchSpace,
    "generator": GeneratorConfig,
    "paths": PathsConfig,
    "report": ReportConfig,
    "bench": BenchConfig,
    "pipeline": PipelineConfig,
    "pitch": PitchSpec,
}


@dataclass(frozen=True)
class RunConfig:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    model: MpnnConfig = field(default_factory=MpnnConfig)
    training: TrainConfig = field(default_factory=TrainConfig)
    search: SearchSpace = field(default_factory=SearchSpace)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    paths: PathsConfig = field(default_factory=PathsConfig)
    report: ReportConfig = field(default_factory=ReportConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    pitch: PitchSpec = field(default_factory=PitchSpec)
    strict: bool = False

    def validate(self) -> "RunConfig":
        for name in SECTIONS:
            section = getattr(self, name)
            if not hasattr(section, "validate"):
                continue
            try:
                section.validate()
            except ConfigError as e:
                raise ConfigError(f"{name}.{e.key_path}", e.message) from e
            except TypeError as e:
                raise ConfigError(name, f"invalid value type ({e})") from e
        return self

    def to_dict(self) -> dict:
        return _plain(dataclasses.asdict(self))


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _is_tuple_type(tp) -> bool:
    if typing.get_origin(tp) is tuple:
        return True
    if typing.get_origin(tp) in (typing.Union, types.UnionType):
        return any(_is_tuple_type(a) for a in typing.get_args(tp))
    return False


def build_dataclass(cls, data, path: str):
    """Instantiate ``cls`` from a mapping, recursing into nested dataclasses."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(path, f"expected a mapping, got {type(data).__name__}")
    hints = typing.get_type_hints(cls)
    known = {f.name: f for f in fields(cls) if f.init}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}" if path else unknown[0], "unknown key")
    kwargs = {}
    for name, value in data.items():
        tp = hints.get(name)
        key_path = f"{path}.{name}" if path else name
        if is_dataclass(tp):
            kwargs[name] = build_dataclass(tp, value, key_path)
        elif _is_tuple_type(tp) and isinstance(value, list):
            kwargs[name] = tuple(value)
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except InvalidState as e:
        raise ConfigError(path, str(e)) from e
    except TypeError as e:
        raise ConfigError(path, str(e)) from e


def load_config(path: str | Path | None = None) -> RunConfig:
    """Read ``config.yaml`` (or defaults when ``path`` is None) and validate it."""
    data = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise MissingPathError(path, "config file")
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    config = build_dataclass(RunConfig, data, "")
    logger.info("Loaded run config from %s", path or "defaults")
    return config.validate()


def apply_overrides(
    config: RunConfig,
    seed: int | None = None,
    strict: bool | None = None,
    out: str | None = None,
    data: str | None = None,
    model: str | None = None,
    predictions: str | None = None,
) -> RunConfig:
    """Command-line flags win over file values. ``seed`` sets every seed."""
    if seed is not None:
        config = replace(
            config,
            model=replace(config.model, seed=seed),
            training=replace(config.training, seed=seed),
            search=replace(config.search, seed=seed),
            generator=replace(config.generator, seed=seed),
            bench=replace(config.bench, seed=seed),
        )
    if strict is not None:
        config = replace(config, strict=strict)
    if config.strict:
        config = replace(config, training=replace(config.training, strict=True))
    paths = {
        k: v
        for k, v in {"runs_dir": out, "data": data, "model": model, "predictions": predictions}.items()
        if v is not None
    }
    if paths:
        config = replace(config, paths=replace(config.paths, **paths))
    return config.validate()


def require_path(config: RunConfig, name: str, flag: str, what: str) -> Path:
    value = getattr(config.paths, name)
    if value is None:
        raise ConfigError(f"paths.{name}", f"no {what} given (set it or pass {flag})")
    path = Path(value)
    if not path.exists():
        logger.error("Missing %s: %s", what, path)
        raise MissingPathError(path, what)
    return path
