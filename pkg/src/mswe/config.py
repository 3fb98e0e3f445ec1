"""``key = value`` experiment config files with command-line overrides."""
from __future__ import annotations

import dataclasses
from pathlib import Path

from .classifier import ClassifierConfig
from .evaluation import DEFAULT_BETAS
from .trainer import TrainConfig


class ConfigError(ValueError):
    pass


PATH_KEYS = (
    "corpus", "lexicon_pos", "lexicon_neg", "markers", "embeddings", "checkpoint",
    "classifier", "train_data", "dev_data", "test_data", "predict_input", "predictions",
    "csv", "report",
)
CLF_PREFIX = "clf_"


def _parse_list(cast):
    def parse(v):
        if isinstance(v, (list, tuple)):
            return tuple(cast(x) for x in v)
        return tuple(cast(x) for x in str(v).split(",") if x.strip())
    return parse


def _scalar(kind):
    if kind is int or kind == "int":
        return int
    if kind is float or kind == "float":
        return float
    return str


def _schema() -> dict:
    schema = {}
    for f in dataclasses.fields(TrainConfig):
        schema[f.name] = _scalar(f.type)
    for f in dataclasses.fields(ClassifierConfig):
        schema[CLF_PREFIX + f.name] = _parse_list(int) if f.name == "widths" else _scalar(f.type)
    for k in PATH_KEYS:
        schema[k] = str
    schema["betas"] = _parse_list(float)
    schema["seeds"] = _parse_list(int)
    schema["model_name"] = str
    schema["dataset"] = str
    return schema


SCHEMA = _schema()


@dataclasses.dataclass
class CliConfig:
    values: dict
    base_dir: Path = Path(".")

    def get(self, key, default=None):
        return self.values.get(key, default)

    def path(self, key, must_exist: bool = False) -> Path:
        v = self.values.get(key)
        if v is None:
            raise ConfigError(f"config key {key!r} is required for this command")
        p = Path(v)
        if not p.is_absolute():
            p = self.base_dir / p
        if must_exist and not p.exists():
            raise ConfigError(f"{key}: path does not exist: {p}")
        return p

    def train_config(self) -> TrainConfig:
        kw = {f.name: self.values[f.name] for f in dataclasses.fields(TrainConfig)
              if f.name in self.values}
        try:
            return TrainConfig(**kw)
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def classifier_config(self) -> ClassifierConfig:
        kw = {f.name: self.values[CLF_PREFIX + f.name] for f in dataclasses.fields(ClassifierConfig)
              if CLF_PREFIX + f.name in self.values}
        try:
            return ClassifierConfig(**kw)
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def betas(self):
        return tuple(self.values.get("betas", DEFAULT_BETAS))


def _convert(key: str, raw):
    if key not in SCHEMA:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        return SCHEMA[key](raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def parse_config_text(text: str, source: str = "<config>") -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        key, sep, val = s.partition("=")
        if not sep:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key = key.strip()
        try:
            values[key] = _convert(key, val.strip())
        except ConfigError as e:
            raise ConfigError(f"{source}:{lineno}: {e}") from None
    return values


def load_config(path=None, overrides=()) -> CliConfig:
    """Read ``path`` (if given), then apply ``key=value`` overrides; later wins.

    Relative paths in the file resolve against the file's directory; paths given
    as overrides resolve against the working directory.
    """
    values = {}
    base = Path(".")
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        base = Path(path).parent
        values = parse_config_text(text, str(path))
        values = {k: (str(base / v) if k in PATH_KEYS and not Path(v).is_absolute() else v)
                  for k, v in values.items()}
    for ov in overrides:
        key, sep, val = ov.partition("=")
        if not sep:
            raise ConfigError(f"override must be key=value, got {ov!r}")
        values[key.strip()] = _convert(key.strip(), val.strip())
    return CliConfig(values, Path("."))


def dump_config(values: dict) -> str:
    lines = []
    for k, v in values.items():
        if isinstance(v, tuple):
            v = ",".join(str(x) for x in v)
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"
