"""JSON configuration schema, validation, and resolved-config emission.

A run is fully described by one JSON file; unknown keys are rejected and
every applied default survives a round trip through the resolved config
written next to the outputs.  Distances come in as kilometers and the
optical wavelength in nanometers; everything downstream is SI.
"""

import hashlib
import json
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from .channel import ChannelParams
from .errors import ConfigError
from .power import PowerParams

SCHEMES = ("optivote", "optivote_fixed_power", "ideal_mv", "fedavg_air")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ChannelConfig(_Strict):
    d_min_km: float = 500.0
    d_max_km: float = 2000.0
    lambda_opt_nm: float = 1550.0
    a0: float = 0.9
    xi_p: float = 1.5
    sigma_n2: float = 0.1
    c_fspl: Optional[float] = None

    @model_validator(mode="after")
    def _check(self):
        if not (0 < self.d_min_km < self.d_max_km):
            raise ValueError("channel.d_min_km must satisfy 0 < d_min_km < d_max_km")
        if not (0 < self.a0 <= 1):
            raise ValueError("channel.a0 must lie in (0, 1]")
        if self.xi_p <= 0:
            raise ValueError("channel.xi_p must be positive")
        if self.sigma_n2 < 0:
            raise ValueError("channel.sigma_n2 must be non-negative")
        return self

    def to_params(self) -> ChannelParams:
        return ChannelParams(
            d_min=self.d_min_km * 1e3,
            d_max=self.d_max_km * 1e3,
            lambda_opt=self.lambda_opt_nm * 1e-9,
            a0=self.a0,
            xi_p=self.xi_p,
            sigma_n2=self.sigma_n2,
            c_fspl=self.c_fspl,
        )


class PowerConfig(_Strict):
    p_avg: float = 1.0
    p_min: float = 0.1
    p_max: float = 2.0
    rho: float = 0.05
    abar_scope: Literal["all", "active"] = "all"

    @model_validator(mode="after")
    def _check(self):
        if not (0 < self.p_min <= self.p_avg <= self.p_max):
            raise ValueError("power.p_min must satisfy 0 < p_min <= p_avg <= p_max")
        if self.rho < 0:
            raise ValueError("power.rho must be non-negative")
        return self

    def to_params(self) -> PowerParams:
        return PowerParams(
            p_avg=self.p_avg, p_min=self.p_min, p_max=self.p_max,
            rho=self.rho, abar_scope=self.abar_scope,
        )


class DatasetConfig(_Strict):
    type: Literal["synthetic", "mnist"] = "synthetic"
    # synthetic
    num_classes: int = 10
    n: int = 2000
    n_test: int = 500
    d: int = 20
    separation: float = 4.0
    # mnist (IDX paths)
    train_images: Optional[str] = None
    train_labels: Optional[str] = None
    test_images: Optional[str] = None
    test_labels: Optional[str] = None

    @model_validator(mode="after")
    def _check(self):
        if self.type == "mnist":
            missing = [k for k in ("train_images", "train_labels", "test_images",
                                   "test_labels") if getattr(self, k) is None]
            if missing:
                raise ValueError(f"learner.dataset.{missing[0]} is required for mnist")
        if min(self.num_classes, self.n, self.d) < 1 or self.n_test < 1:
            raise ValueError("learner.dataset sizes must be >= 1")
        return self


class ModelConfig(_Strict):
    arch: Literal["logistic", "mlp"] = "logistic"
    hidden: int = 32


class PartitionConfig(_Strict):
    mode: Literal["iid", "noniid"] = "iid"
    labels_per_node: int = 2

    @model_validator(mode="after")
    def _check(self):
        if self.labels_per_node < 1:
            raise ValueError("learner.partition.labels_per_node must be >= 1")
        return self


class LearnerConfig(_Strict):
    dataset: DatasetConfig = DatasetConfig()
    model: ModelConfig = ModelConfig()
    partition: PartitionConfig = PartitionConfig()
    local_steps: int = 1


class RunConfig(_Strict):
    M: int = 20
    m: int = 4
    rounds: int = 200
    d_b: int = 64
    eta: float = 0.05
    lr: Literal["constant", "theorem1"] = "constant"
    L1_estimate: Optional[float] = None
    scheme: Literal["optivote", "optivote_fixed_power", "ideal_mv", "fedavg_air"] = "optivote"
    seed: int = 0
    frame_capacity: Optional[int] = None  # default 2q (single frame)

    @model_validator(mode="after")
    def _check(self):
        if not (1 <= self.m <= self.M):
            raise ValueError("run.m must satisfy 1 <= m <= M")
        if self.rounds < 0 or self.d_b < 1 or self.eta <= 0:
            raise ValueError("run.rounds >= 0, run.d_b >= 1, run.eta > 0 required")
        if self.lr == "theorem1" and self.L1_estimate is None:
            raise ValueError("run.L1_estimate is required when run.lr = 'theorem1'")
        return self


class OutputConfig(_Strict):
    dir: str = "out"
    dump_power: bool = False
    dump_slots: bool = False


class Config(_Strict):
    channel: ChannelConfig = ChannelConfig()
    power: PowerConfig = PowerConfig()
    learner: LearnerConfig = LearnerConfig()
    run: RunConfig = RunConfig()
    output: OutputConfig = OutputConfig()


def _format_validation_error(err: ValidationError) -> str:
    parts = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"] if p != "_check")
        parts.append(f"{loc or '<root>'}: {e['msg']}")
    return "; ".join(parts)


def load_config(data: dict, overrides: dict | None = None) -> Config:
    """Validate a raw config dict, applying dotted-path overrides first."""
    if overrides:
        data = json.loads(json.dumps(data))  # deep copy
        for dotted, value in overrides.items():
            node = data
            keys = dotted.split(".")
            for k in keys[:-1]:
                node = node.setdefault(k, {})
                if not isinstance(node, dict):
                    raise ConfigError(f"override path {dotted!r} crosses a non-object")
            node[keys[-1]] = value
    try:
        return Config.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_format_validation_error(err)) from err


def parse_config(path: str | Path, overrides: dict | None = None) -> Config:
    """Read, validate, and default-fill a JSON config file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from err
    return load_config(data, overrides)


def resolved_json(cfg: Config) -> str:
    """Canonical JSON with every default made explicit."""
    return json.dumps(cfg.model_dump(), indent=2, sort_keys=True)


def config_hash(cfg: Config) -> str:
    return hashlib.sha256(
        json.dumps(cfg.model_dump(), sort_keys=True).encode()
    ).hexdigest()[:16]
