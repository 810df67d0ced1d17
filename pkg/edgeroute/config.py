"""
Pipeline configuration.

One YAML file describes a whole experiment: where the data comes from
(a manifest or synthetic populations), which predictors play the raw and
edge roles, the edge operator, the NSD tolerance, the router split and the
analysis significance level. Relative paths resolve against the config
file's directory.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Tuple

import yaml

from edgeroute.analysis import DEFAULT_ALPHA
from edgeroute.edges import EdgeOperatorKind
from edgeroute.errors import ConfigError
from edgeroute.imaging import MODALITIES
from edgeroute.metrics import DEFAULT_TAU
from edgeroute.predictors import PredictorKind
from edgeroute.synth import SynthSpec

DEFAULT_ROUTER_FRACTION = 0.8

TOP_LEVEL_KEYS = (
    "seed",
    "output_dir",
    "modalities",
    "data",
    "predictors",
    "edge",
    "metrics",
    "split",
    "analysis",
    "workers",
)


@dataclass(frozen=True)
class SynthConfig:
    out_dir: Path
    populations: Tuple[SynthSpec, ...]


@dataclass(frozen=True)
class DataConfig:
    manifest: Optional[Path] = None
    synth: Optional[SynthConfig] = None


@dataclass(frozen=True)
class PredictorConfig:
    kind: PredictorKind
    dir: Optional[Path] = None
    column: Optional[str] = None


@dataclass(frozen=True)
class EdgeConfig:
    operator: EdgeOperatorKind = EdgeOperatorKind.KIRSCH
    scale: Optional[float] = None


@dataclass(frozen=True)
class SplitConfig:
    router_fraction: float = DEFAULT_ROUTER_FRACTION
    seed: int = 0


@dataclass(frozen=True)
class PipelineConfig:
    data: DataConfig
    output_dir: Path
    seed: int = 0
    modalities: Optional[Tuple[str, ...]] = MODALITIES
    raw: PredictorConfig = PredictorConfig(PredictorKind.OTSU)
    edge_predictor: PredictorConfig = PredictorConfig(PredictorKind.EDGE_OTSU)
    edge: EdgeConfig = field(default_factory=EdgeConfig)
    tau: float = DEFAULT_TAU
    split: SplitConfig = field(default_factory=SplitConfig)
    alpha: float = DEFAULT_ALPHA
    workers: int = 1


def _section(data: Any, name: str, allowed: Iterable[str]) -> Dict[str, Any]:
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"'{name}' must be a mapping")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in '{name}': {', '.join(str(k) for k in unknown)}")
    return data


def _number(value: Any, key: str, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{key}' must be a number, got {value!r}")
    if kind is int and value != int(value):
        raise ConfigError(f"'{key}' must be an integer, got {value!r}")
    return kind(value)


def _path(base: Path, value: Any, key: str) -> Path:
    if not isinstance(value, str) or not value:
        raise ConfigError(f"'{key}' must be a path string")
    path = Path(value)
    return path if path.is_absolute() else base / path


def _parse_synth(raw: Any, base: Path, seed: int) -> SynthConfig:
    section = _section(raw, "data.synth", ("out_dir", "size", "populations"))
    populations = section.get("populations")
    if not isinstance(populations, list) or not populations:
        raise ConfigError("'data.synth.populations' must be a non-empty list")
    defaults: Dict[str, Any] = {}
    if "size" in section:
        defaults["size"] = _number(section["size"], "data.synth.size", int)
    specs = []
    for index, population in enumerate(populations):
        if not isinstance(population, dict):
            raise ConfigError(f"'data.synth.populations[{index}]' must be a mapping")
        specs.append(SynthSpec.from_dict({**defaults, **population}, default_seed=seed + index))
    out_dir = _path(base, section.get("out_dir", "data"), "data.synth.out_dir")
    return SynthConfig(out_dir=out_dir, populations=tuple(specs))


def _parse_data(raw: Any, base: Path, seed: int) -> DataConfig:
    section = _section(raw, "data", ("manifest", "synth"))
    has_manifest, has_synth = "manifest" in section, "synth" in section
    if has_manifest == has_synth:
        raise ConfigError("'data' needs exactly one of 'manifest' or 'synth'")
    if has_manifest:
        return DataConfig(manifest=_path(base, section["manifest"], "data.manifest"))
    return DataConfig(synth=_parse_synth(section["synth"], base, seed))


def _parse_predictor(raw: Any, role: str, base: Path, default: PredictorKind) -> PredictorConfig:
    key = f"predictors.{role}"
    section = _section(raw, key, ("kind", "dir", "column"))
    try:
        kind = PredictorKind(section.get("kind", default.value))
    except ValueError as e:
        raise ConfigError(f"'{key}.kind': {e}") from e
    if kind is not PredictorKind.PRECOMPUTED:
        return PredictorConfig(kind)
    if ("dir" in section) == ("column" in section):
        raise ConfigError(f"'{key}' of kind masks needs exactly one of 'dir' or 'column'")
    if "dir" in section:
        return PredictorConfig(kind, dir=_path(base, section["dir"], f"{key}.dir"))
    column = section["column"]
    if column not in ("pred_raw", "pred_edge"):
        raise ConfigError(f"'{key}.column' must be pred_raw or pred_edge, got {column!r}")
    return PredictorConfig(kind, column=column)


def parse_config(data: Any, base: Path) -> PipelineConfig:
    """Validate a decoded YAML document; base is the directory relative paths resolve against."""
    data = _section(data, "config", TOP_LEVEL_KEYS)
    if "data" not in data:
        raise ConfigError("missing required key 'data'")
    seed = _number(data.get("seed", 0), "seed", int)

    modalities: Optional[Tuple[str, ...]] = MODALITIES
    if "modalities" in data:
        raw_modalities = data["modalities"]
        if raw_modalities is not None and (
            not isinstance(raw_modalities, list) or not all(isinstance(m, str) for m in raw_modalities)
        ):
            raise ConfigError("'modalities' must be a list of names (or null for any)")
        modalities = None if raw_modalities is None else tuple(raw_modalities)

    predictors = _section(data.get("predictors"), "predictors", ("raw", "edge"))

    edge = _section(data.get("edge"), "edge", ("operator", "scale"))
    try:
        operator = EdgeOperatorKind(edge.get("operator", EdgeOperatorKind.KIRSCH.value))
    except ValueError as e:
        raise ConfigError(f"'edge.operator': {e}") from e
    scale = edge.get("scale")
    if scale is not None:
        scale = _number(scale, "edge.scale")
        if scale <= 0:
            raise ConfigError(f"'edge.scale' must be > 0, got {scale}")

    metrics = _section(data.get("metrics"), "metrics", ("tau",))
    tau = _number(metrics.get("tau", DEFAULT_TAU), "metrics.tau")
    if tau < 0:
        raise ConfigError(f"'metrics.tau' must be >= 0, got {tau}")

    split = _section(data.get("split"), "split", ("router_fraction", "seed"))
    fraction = _number(split.get("router_fraction", DEFAULT_ROUTER_FRACTION), "split.router_fraction")
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"'split.router_fraction' must lie in (0, 1), got {fraction}")
    split_seed = _number(split.get("seed", seed), "split.seed", int)

    analysis = _section(data.get("analysis"), "analysis", ("alpha",))
    alpha = _number(analysis.get("alpha", DEFAULT_ALPHA), "analysis.alpha")
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"'analysis.alpha' must lie in (0, 1), got {alpha}")

    workers = _number(data.get("workers", 1), "workers", int)
    if workers < 1:
        raise ConfigError(f"'workers' must be >= 1, got {workers}")

    return PipelineConfig(
        data=_parse_data(data["data"], base, seed),
        output_dir=_path(base, data.get("output_dir", "out"), "output_dir"),
        seed=seed,
        modalities=modalities,
        raw=_parse_predictor(predictors.get("raw"), "raw", base, PredictorKind.OTSU),
        edge_predictor=_parse_predictor(predictors.get("edge"), "edge", base, PredictorKind.EDGE_OTSU),
        edge=EdgeConfig(operator, scale),
        tau=tau,
        split=SplitConfig(fraction, split_seed),
        alpha=alpha,
        workers=workers,
    )


def _read_yaml(path: Path) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return yaml.safe_load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: invalid YAML ({e})") from e


def load_config(path: Path) -> PipelineConfig:
    path = Path(path)
    return parse_config(_read_yaml(path), path.parent)


def load_populations(path: Path) -> SynthConfig:
    """
    Synthetic populations from a YAML file: either a pipeline config with a
    data.synth section, or a bare mapping with populations (and optional
    size, seed, out_dir).
    """
    path = Path(path)
    data = _read_yaml(path)
    if isinstance(data, dict) and "data" in data:
        config = parse_config(data, path.parent)
        if config.data.synth is None:
            raise ConfigError(f"{path}: 'data' has no 'synth' section")
        return config.data.synth
    section = _section(data, "synth", ("seed", "size", "populations", "out_dir"))
    seed = _number(section.get("seed", 0), "seed", int)
    synth = {k: v for k, v in section.items() if k != "seed"}
    return _parse_synth(synth, path.parent, seed)
