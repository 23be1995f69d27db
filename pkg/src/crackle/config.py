"""Run configuration shared by every CLI command."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .audio_io import OVERLAP, WINDOW_LEN, window_stride
from .classifiers import DEFAULT_GRIDS, KINDS
from .errors import ConfigError
from .features import SUBWINDOW_LEN, SUBWINDOW_STRIDE


@dataclass
class RunConfig:
    window_len: int = WINDOW_LEN
    overlap_fraction: float = OVERLAP
    subwindow_len: int = SUBWINDOW_LEN
    subwindow_stride: int = SUBWINDOW_STRIDE
    classifier: str = "svm_rbf"
    classifiers: list = field(default_factory=lambda: list(KINDS))
    grid_c: Optional[list] = None
    grid_gamma: Optional[list] = None
    grid_k: Optional[list] = None
    grid_rounds: Optional[list] = None
    folds: int = 3
    cycles: int = 100
    train_fraction: float = 0.7
    seed: int = 0
    normal_count: int = 208
    annotations: Optional[str] = None
    audio_dir: Optional[str] = None
    model: Optional[str] = None
    output: Optional[str] = None
    html: Optional[str] = None

    def validate(self):
        if self.window_len < 2 or self.window_len & (self.window_len - 1):
            raise ConfigError(f"window_len must be a power of two >= 2, got {self.window_len}")
        try:
            window_stride(self.window_len, self.overlap_fraction)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if not 2 <= self.subwindow_len <= self.window_len or self.subwindow_stride < 1:
            raise ConfigError("subwindow_len must lie in [2, window_len] and stride be >= 1")
        for kind in [self.classifier, *self.classifiers]:
            if kind not in KINDS:
                raise ConfigError(f"unknown classifier {kind!r}; expected one of {', '.join(KINDS)}")
        if self.folds < 2 or self.cycles < 1:
            raise ConfigError("folds must be >= 2 and cycles >= 1")
        if not 0 < self.train_fraction < 1:
            raise ConfigError(f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if self.normal_count < 0:
            raise ConfigError("normal_count must be non-negative")
        return self

    def grid(self, kind):
        """The default grid for ``kind`` with any configured axes substituted."""
        g = {k: list(v) for k, v in DEFAULT_GRIDS[kind].items()}
        overrides = {"C": self.grid_c, "gamma": self.grid_gamma, "k": self.grid_k,
                     "rounds": self.grid_rounds}
        for axis, values in overrides.items():
            if values is not None and axis in g:
                g[axis] = list(values)
        return g

    def to_dict(self):
        return dataclasses.asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _coerce(name, raw, default):
    text = raw.strip()
    if text.lower() in ("", "none", "null"):
        return None
    try:
        if name in ("classifiers",):
            return [t.strip() for t in text.split(",") if t.strip()]
        if name.startswith("grid_"):
            conv = int if name in ("grid_k", "grid_rounds") else float
            return [conv(t) for t in text.split(",") if t.strip()]
        if isinstance(default, bool):
            return text.lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None
    return text


def parse_config_text(text: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment. Unknown keys are an error."""
    defaults = RunConfig()
    known = {f.name for f in dataclasses.fields(RunConfig)}
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value, getattr(defaults, key))
    return out


def load_config(path=None, overrides=None) -> RunConfig:
    values = {}
    if path is not None:
        try:
            values.update(parse_config_text(Path(path).read_text(encoding="utf-8")))
        except OSError as e:
            raise ConfigError(f"cannot read config file {path}: {e.strerror}") from None
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig(**values).validate()
