"""Experiment configuration loaded from JSON.

Every size-dependent parameter is a power law ``coef * n ** exponent``,
written in JSON as ``[coef, exponent]``.  Exponents may be numbers or
fraction strings such as ``"-4/7"``.

Example::

    {
      "experiment": "approx_error",
      "n_list": [1000, 2000],
      "methods": ["nystrom", "accumulation:8", "gaussian"],
      "kernel": {"family": "gaussian", "bandwidth": [1.5, "-1/7"]},
      "lambda": [0.5, "-4/7"],
      "d": [3.0, "3/7"],
      "gamma": 0.6,
      "noise_sd": 0.5,
      "replicates": 30,
      "master_seed": 0
    }
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional

from ..kernel import KernelSpec

EXPERIMENTS = ("approx_error", "tradeoff", "diagnose", "bench_products")
METHODS = (
    "exact",
    "identity",
    "nystrom",
    "accumulation",
    "gaussian",
    "sparse_projection",
    "leverage_nystrom",
)


class ConfigError(ValueError):
    pass


def _number(value, what) -> float:
    try:
        x = float(Fraction(value)) if isinstance(value, str) else float(value)
    except (ValueError, TypeError, ZeroDivisionError):
        raise ConfigError(f"{what}: cannot parse {value!r} as a number") from None
    if not math.isfinite(x):
        raise ConfigError(f"{what}: must be finite")
    return x


@dataclass(frozen=True)
class Schedule:
    coef: float
    exponent: float = 0.0

    def __call__(self, n: int) -> float:
        return self.coef * float(n) ** self.exponent

    def floor(self, n: int) -> int:
        return max(1, int(math.floor(self(n))))

    @classmethod
    def parse(cls, value, what="schedule") -> "Schedule":
        if isinstance(value, dict):
            value = [value.get("coef"), value.get("exponent", 0)]
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise ConfigError(f"{what}: expected [coef, exponent]")
            coef, exponent = _number(value[0], what), _number(value[1], what)
        else:
            coef, exponent = _number(value, what), 0.0
        if coef <= 0:
            raise ConfigError(f"{what}: coefficient must be positive")
        return cls(coef, exponent)

    def to_json(self):
        return [self.coef, self.exponent]


@dataclass(frozen=True)
class KernelSchedule:
    family: str = "gaussian"
    bandwidth: Schedule = Schedule(1.0)
    lengthscale: Schedule = Schedule(1.0)
    smoothness: float = 1.5

    def at(self, n: int) -> KernelSpec:
        return KernelSpec(
            family=self.family,
            bandwidth=self.bandwidth(n),
            lengthscale=self.lengthscale(n),
            smoothness=self.smoothness,
        )

    @classmethod
    def parse(cls, raw) -> "KernelSchedule":
        if not isinstance(raw, dict):
            raise ConfigError("kernel: expected an object")
        unknown = set(raw) - {"family", "bandwidth", "lengthscale", "smoothness"}
        if unknown:
            raise ConfigError(f"kernel: unknown keys {sorted(unknown)}")
        out = cls(
            family=raw.get("family", "gaussian"),
            bandwidth=Schedule.parse(raw.get("bandwidth", 1.0), "kernel.bandwidth"),
            lengthscale=Schedule.parse(raw.get("lengthscale", 1.0), "kernel.lengthscale"),
            smoothness=_number(raw.get("smoothness", 1.5), "kernel.smoothness"),
        )
        try:
            out.at(1000)
        except ValueError as exc:
            raise ConfigError(f"kernel: {exc}") from None
        return out


@dataclass(frozen=True)
class MethodSpec:
    name: str
    m: Optional[int] = None

    @property
    def label(self) -> str:
        return f"{self.name}:{self.m}" if self.name == "accumulation" else self.name

    @property
    def record_m(self) -> Optional[int]:
        if self.name == "accumulation":
            return self.m
        if self.name in ("nystrom", "leverage_nystrom"):
            return 1
        return None

    @classmethod
    def parse(cls, text) -> "MethodSpec":
        if not isinstance(text, str):
            raise ConfigError(f"method must be a string, got {text!r}")
        name, _, arg = text.strip().replace("(", ":").rstrip(")").partition(":")
        if name not in METHODS:
            raise ConfigError(f"unknown method {name!r}; choose from {METHODS}")
        if name == "accumulation":
            try:
                m = int(arg)
            except ValueError:
                raise ConfigError(f"accumulation needs an integer m, got {text!r}") from None
            if m < 1:
                raise ConfigError("accumulation m must be >= 1")
            return cls(name, m)
        if arg:
            raise ConfigError(f"method {name!r} takes no argument")
        return cls(name)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n_list: tuple
    methods: tuple = (MethodSpec("nystrom"), MethodSpec("gaussian"))
    kernel: KernelSchedule = KernelSchedule()
    lambda_schedule: Schedule = Schedule(0.5, -4 / 7)
    d_schedule: Schedule = Schedule(1.0, 3 / 7)
    gamma: float = 0.6
    noise_sd: float = 0.5
    replicates: int = 30
    master_seed: int = 0
    dataset_path: Optional[str] = None
    target: object = -1
    test_fraction: float = 0.2
    max_test: int = 2000
    # diagnose
    delta_factor: float = 1.0
    d_multipliers: tuple = (2,)
    m_list: tuple = (1, 4, 16)
    trials: int = 200
    include_block: bool = True
    # bench_products
    bench_d: int = 60
    repeats: int = 5
    threads: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if not self.n_list or any(int(n) < 2 for n in self.n_list):
            raise ConfigError("n_list must hold sample sizes >= 2")
        if not 0 < self.gamma < 1:
            raise ConfigError("gamma must lie in (0, 1)")
        if self.noise_sd < 0:
            raise ConfigError("noise_sd must be non-negative")
        if not 0 < self.test_fraction < 1:
            raise ConfigError("test_fraction must lie in (0, 1)")
        if self.trials < 1 or self.repeats < 1 or self.threads < 1 or self.bench_d < 1:
            raise ConfigError("trials, repeats, threads and bench_d must be >= 1")
        if any(int(m) < 1 for m in self.m_list) or any(k <= 0 for k in self.d_multipliers):
            raise ConfigError("m_list and d_multipliers must be positive")
        if self.delta_factor <= 0:
            raise ConfigError("delta_factor must be positive")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        raw = dict(raw)
        raw.pop("description", None)
        kw = {}
        try:
            kw["experiment"] = str(raw.pop("experiment")).replace("-", "_")
            kw["n_list"] = tuple(int(n) for n in raw.pop("n_list"))
        except KeyError as exc:
            raise ConfigError(f"missing required key {exc}") from None
        except (TypeError, ValueError):
            raise ConfigError("n_list must be a list of integers") from None
        if "methods" in raw:
            kw["methods"] = tuple(MethodSpec.parse(t) for t in raw.pop("methods"))
        if "kernel" in raw:
            kw["kernel"] = KernelSchedule.parse(raw.pop("kernel"))
        if "lambda" in raw:
            kw["lambda_schedule"] = Schedule.parse(raw.pop("lambda"), "lambda")
        if "d" in raw:
            kw["d_schedule"] = Schedule.parse(raw.pop("d"), "d")
        for name in ("gamma", "noise_sd", "test_fraction", "delta_factor"):
            if name in raw:
                kw[name] = _number(raw.pop(name), name)
        for name in ("replicates", "master_seed", "max_test", "trials", "bench_d", "repeats", "threads"):
            if name in raw:
                value = raw.pop(name)
                if isinstance(value, bool) or not isinstance(value, int):
                    raise ConfigError(f"{name} must be an integer")
                kw[name] = value
        for name in ("m_list", "d_multipliers"):
            if name in raw:
                kw[name] = tuple(raw.pop(name))
        if "include_block" in raw:
            kw["include_block"] = bool(raw.pop("include_block"))
        if "dataset_path" in raw:
            kw["dataset_path"] = raw.pop("dataset_path")
        if "target" in raw:
            kw["target"] = raw.pop("target")
        if raw:
            raise ConfigError(f"unknown config keys {sorted(raw)}")
        return cls(**kw)


def load_config(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return ExperimentConfig.from_dict(raw)


def preset_names() -> list:
    files = resources.files("accusketch.harness") / "presets"
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> ExperimentConfig:
    path = resources.files("accusketch.harness") / "presets" / f"{name}.json"
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {preset_names()}")
    return ExperimentConfig.from_dict(json.loads(path.read_text(encoding="utf-8")))
