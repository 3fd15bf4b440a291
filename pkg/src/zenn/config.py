"""Experiment configuration schemas and loading.

A config file is a YAML (or JSON) mapping describing one experiment. Unknown
keys are rejected. Relative paths are resolved against the directory that
holds the config file.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .activations import Activation
from .architectures import VARIANTS
from .exceptions import ConfigError
from .initialization import Constant, InitSpec, Normal, Uniform


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class NormalDist(_Strict):
    dist: Literal["normal"]
    mean: float = 0.0
    std: float = Field(1.0, gt=0)


class UniformDist(_Strict):
    dist: Literal["uniform"]
    lo: float = -1.0
    hi: float = 1.0

    @model_validator(mode="after")
    def _ordered(self):
        if not self.lo < self.hi:
            raise ValueError("uniform distribution requires lo < hi")
        return self


class ConstantDist(_Strict):
    dist: Literal["constant"]
    value: float = 0.0


Dist = Union[NormalDist, UniformDist, ConstantDist]


def _unit_normal():
    return NormalDist(dist="normal")


def _zero():
    return ConstantDist(dist="constant")


class InitConfig(_Strict):
    w1: Dist = Field(default_factory=_unit_normal, discriminator="dist")
    b1: Dist = Field(default_factory=_zero, discriminator="dist")
    w2: Dist = Field(default_factory=_unit_normal, discriminator="dist")
    b2: Dist = Field(default_factory=_zero, discriminator="dist")
    seed: int = 0

    def to_spec(self) -> InitSpec:
        def conv(d):
            if d.dist == "normal":
                return Normal(d.mean, d.std)
            if d.dist == "uniform":
                return Uniform(d.lo, d.hi)
            return Constant(d.value)

        return InitSpec(conv(self.w1), conv(self.b1), conv(self.w2), conv(self.b2), self.seed)


ActivationName = Literal["sine", "cosine", "relu", "sigmoid", "identity"]


class ShallowModelConfig(_Strict):
    kind: Literal["zenn", "mlp"] = "zenn"
    n: int = Field(64, ge=1)
    alpha: float = Field(1.1, gt=0)
    beta: float = Field(0.5, gt=0)
    activation: ActivationName = "sine"


class ImageModelConfig(_Strict):
    variant: str = "randozenn"
    n: int = Field(64, ge=1)
    m: int = Field(512, ge=1)
    alpha: float = Field(0.0, ge=0)
    rho: float = Field(10.0, gt=0)
    mlp_units: int = Field(1024, ge=1)
    hidden: int = Field(64, ge=1)
    depth: int = Field(3, ge=0)
    seed: int = 0

    @field_validator("variant")
    @classmethod
    def _known(cls, v):
        if v.lower() not in VARIANTS:
            raise ValueError(f"unknown variant {v!r}; valid variants: {', '.join(VARIANTS)}")
        return v.lower()


class TrainSection(_Strict):
    learning_rate: float = Field(0.25, ge=0)
    epochs: int = Field(1000, ge=0)
    log_interval: int = Field(100, ge=1)
    weight_decay: float = Field(0.0, ge=0)
    seed: int = 0
    record_wall_time: bool = False


class Synth1dData(_Strict):
    source: Literal["synth1d"] = "synth1d"
    n_points: int = Field(200, ge=1)
    x_range: tuple[float, float] = (0.0, 2.0)
    seed: int = 0
    noise_std: float = Field(0.0, ge=0)
    train_fraction: Optional[float] = Field(None, gt=0, lt=1)
    split_seed: int = 0

    @model_validator(mode="after")
    def _range(self):
        if not self.x_range[1] > self.x_range[0]:
            raise ValueError("x_range must be an increasing pair")
        return self


class JenaData(_Strict):
    source: Literal["jena"] = "jena"
    path: str
    column: str = "T (degC)"
    max_rows: int = Field(3000, ge=1)
    train_fraction: Optional[float] = Field(None, gt=0, lt=1)
    split_seed: int = 0


class ImageData(_Strict):
    source: Literal["image"] = "image"
    path: str
    train_fraction: float = Field(0.75, gt=0, lt=1)
    split_seed: int = 0


class TrainOutput(_Strict):
    trace: str = "trace.csv"
    model: str = "model.json"
    image: str = "reconstruction.ppm"


class TrainExperiment(_Strict):
    task: Literal["synth1d", "jena", "image"] = "synth1d"
    data: Union[Synth1dData, JenaData, ImageData] = Field(default_factory=Synth1dData, discriminator="source")
    model: Union[ShallowModelConfig, ImageModelConfig] = Field(default_factory=ShallowModelConfig)
    init: InitConfig = Field(default_factory=InitConfig)
    train: TrainSection = Field(default_factory=TrainSection)
    output: TrainOutput = Field(default_factory=TrainOutput)

    @model_validator(mode="before")
    @classmethod
    def _dispatch(cls, values):
        if not isinstance(values, dict):
            return values
        values = dict(values)
        task = values.get("task", "synth1d")
        data = values.get("data")
        if isinstance(data, dict) and "source" not in data:
            values["data"] = {"source": task, **data}
        model = values.get("model")
        if isinstance(model, dict):
            values["model"] = (ImageModelConfig if task == "image" else ShallowModelConfig).model_validate(model)
        elif model is None and task == "image":
            values["model"] = ImageModelConfig()
        return values

    @model_validator(mode="after")
    def _consistent(self):
        if self.data.source != self.task:
            raise ValueError(f"data source {self.data.source!r} does not match task {self.task!r}")
        if (self.task == "image") != isinstance(self.model, ImageModelConfig):
            raise ValueError("image tasks need an image model, 1-D tasks a shallow model")
        return self


class ZentkExperiment(_Strict):
    model: ShallowModelConfig = Field(default_factory=ShallowModelConfig)
    init: InitConfig = Field(default_factory=InitConfig)
    points: list[float] = Field(default_factory=lambda: [0.0, 0.5, 1.0, 1.5, 2.0], min_length=1)
    output: str = "gram.csv"

    @model_validator(mode="after")
    def _zenn_only(self):
        if self.model.kind != "zenn":
            raise ValueError("the closed-form tangent kernel is defined for shallow ZeNNs only")
        return self


Width = Union[int, Literal["inf"]]


class CumulantsExperiment(_Strict):
    order: int = Field(2, ge=1, le=4)
    alpha: float = Field(1.1, gt=0)
    x: float = 0.0
    activation: ActivationName = "sine"
    widths: list[Width] = Field(default_factory=lambda: [1, 2, 4, 8], min_length=1)
    perceptron_cumulant: Optional[float] = None
    init: InitConfig = Field(default_factory=InitConfig)
    samples: int = Field(0, ge=0)
    quadrature_nodes: int = Field(200, ge=2)
    output: str = "cumulants.csv"

    @field_validator("widths")
    @classmethod
    def _positive(cls, v):
        for w in v:
            if w != "inf" and w < 1:
                raise ValueError("widths must be positive integers or 'inf'")
        return v

    @model_validator(mode="after")
    def _samples(self):
        if 0 < self.samples < 10 ** 4:
            raise ValueError("samples must be 0 (no Monte-Carlo) or at least 10000")
        return self

    def width_values(self):
        return [math.inf if w == "inf" else int(w) for w in self.widths]


class CharfnExperiment(_Strict):
    x: list[float] = Field(default_factory=lambda: [0.5], min_length=1)
    t: list[float] = Field(default_factory=lambda: [0.0, 1.0], min_length=1)
    L: float = Field(1.0, gt=0)
    B: float = Field(1.0, gt=0)
    alpha: float = Field(1.0, gt=0)
    n: int = Field(4, ge=1)
    samples: int = Field(0, ge=0)
    seed: int = 0
    output: str = "charfn.csv"

    @field_validator("x")
    @classmethod
    def _positive_x(cls, v):
        if any(not xi > 0 for xi in v):
            raise ValueError("the closed form is derived for x > 0 only")
        return v

    @model_validator(mode="after")
    def _samples(self):
        if 0 < self.samples < 10 ** 4:
            raise ValueError("samples must be 0 (no Monte-Carlo) or at least 10000")
        return self


class GridConfig(_Strict):
    lo: float = -1.0
    hi: float = 1.0
    points: int = Field(2001, ge=2)


class ConvergeExperiment(_Strict):
    model: ShallowModelConfig = Field(default_factory=lambda: ShallowModelConfig(alpha=2.0))
    widths: list[int] = Field(default_factory=lambda: [16, 32, 64, 128, 256, 512], min_length=2)
    grid: GridConfig = Field(default_factory=GridConfig)
    seeds: list[int] = Field(default_factory=lambda: list(range(20)), min_length=1)
    init: InitConfig = Field(default_factory=InitConfig)
    output: str = "convergence.csv"

    @field_validator("widths")
    @classmethod
    def _increasing(cls, v):
        if v[0] < 1 or any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("widths must be increasing positive integers")
        return v


class Synth1dExperiment(_Strict):
    data: Synth1dData = Field(default_factory=Synth1dData)
    output: str = "synth1d.csv"


SCHEMAS = {
    "train": TrainExperiment,
    "image-regress": TrainExperiment,
    "zentk": ZentkExperiment,
    "cumulants": CumulantsExperiment,
    "charfn": CharfnExperiment,
    "converge": ConvergeExperiment,
    "synth1d": Synth1dExperiment,
}


def parse_override(text: str) -> tuple[list[str], object]:
    """``"train.epochs=10"`` -> ``(["train", "epochs"], 10)``; values are parsed as YAML scalars."""
    key, sep, raw = text.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"override {text!r} is not of the form key=value")
    try:
        value = yaml.safe_load(raw) if raw.strip() else ""
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse value in override {text!r}: {exc}") from None
    return key.strip().split("."), value


def apply_overrides(doc: dict, overrides) -> dict:
    doc = dict(doc)
    for text in overrides:
        path, value = parse_override(text)
        node = doc
        for part in path[:-1]:
            child = node.get(part)
            if child is None:
                child = {}
            elif not isinstance(child, dict):
                raise ConfigError(f"override {text!r}: {part!r} is not a mapping")
            node[part] = child = dict(child)
            node = child
        node[path[-1]] = value
    return doc


def format_validation_error(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        where = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"  {where}: {err['msg']}")
    return "invalid configuration:\n" + "\n".join(lines)


def load_config(command: str, path, overrides=()):
    """Read, override and validate a config file; raises ``ConfigError`` on any problem."""
    schema = SCHEMAS[command]
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML/JSON: {exc}") from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    doc = apply_overrides(doc, overrides)
    try:
        return schema.model_validate(doc)
    except ValidationError as exc:
        raise ConfigError(f"{path}: {format_validation_error(exc)}") from None


def activation_of(name: str) -> Activation:
    return Activation.parse(name)
