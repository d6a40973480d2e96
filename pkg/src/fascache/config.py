"""Run configuration: YAML ingestion, validation, and object assembly.

The file format is a nested key-value document (YAML, comments allowed).
dB and dBm appear only in fields suffixed ``_db``/``_dbm``; every
constructed object is strictly SI/linear.  ``RunConfig.from_dict`` and
``to_dict`` round-trip exactly, which the CLI relies on for curve
overrides and tests assert as an invariant.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import yaml

from .correlation import PortGrid
from .network import (
    CachePolicy,
    ContentCatalog,
    NetworkParams,
    db_to_linear,
    dbm_to_watts,
    policy_scalar,
    policy_top_k,
    policy_uniform,
    zipf_popularity,
)

__all__ = ["ConfigError", "RunConfig", "load_config", "SWEEP_AXES"]

SWEEP_AXES = ("eta_db", "mu_s", "q_scalar", "M", "N", "W")


class ConfigError(ValueError):
    """Configuration file is malformed or inconsistent."""


@dataclass(frozen=True)
class NetworkConfig:
    sbs_intensity: float = 1e-2
    tx_power_dbm: float = -30.0
    noise_dbm: float = -60.0
    pathloss_exp: float = 3.0
    pathloss_const: float = 1.0
    eta_db: float = 0.0
    slot_time: float = 1e-3
    max_arq: int = 3


@dataclass(frozen=True)
class FasConfig:
    n1: int = 3
    n2: int = 3
    w1: float = 1.0
    w2: float = 1.0


@dataclass(frozen=True)
class ContentConfig:
    count: int = 100
    zipf_exp: float = 1.0


@dataclass(frozen=True)
class PolicyConfig:
    kind: str = "top_k"  # top_k | uniform | scalar | explicit
    capacity: int = 10
    q: float = 1.0
    probs: tuple = ()


@dataclass(frozen=True)
class NumericsConfig:
    quad_order: int = 30
    mvn_tol: float = 1e-4
    trials: int = 100_000
    seed: int = 20250809


@dataclass(frozen=True)
class SweepConfig:
    axis: str = "eta_db"
    values: tuple = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)


def _take(section: dict, path: str, cls):
    """Build a config dataclass from ``section``, rejecting unknown keys."""
    known = {f.name for f in cls.__dataclass_fields__.values()}
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)}; expected {sorted(known)}")
    coerced = dict(section)
    for key, value in coerced.items():
        if isinstance(value, list):
            coerced[key] = tuple(value)
    try:
        return cls(**coerced)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class RunConfig:
    """Complete description of one analysis/simulation run."""

    network: NetworkConfig = field(default_factory=NetworkConfig)
    fas: FasConfig = field(default_factory=FasConfig)
    content: ContentConfig = field(default_factory=ContentConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    curves: tuple = ()  # (label, RunConfig) pairs; empty means one unnamed curve
    name: str = "run"

    # -- construction -----------------------------------------------------

    @staticmethod
    def from_dict(doc: dict) -> "RunConfig":
        if not isinstance(doc, dict):
            raise ConfigError("configuration root must be a mapping")
        known = {"network", "fas", "content", "policy", "numerics", "sweep", "curves", "name"}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown top-level key(s) {sorted(unknown)}; expected {sorted(known)}")

        base = RunConfig(
            network=_take(doc.get("network", {}), "network", NetworkConfig),
            fas=_take(doc.get("fas", {}), "fas", FasConfig),
            content=_take(doc.get("content", {}), "content", ContentConfig),
            policy=_take(doc.get("policy", {}), "policy", PolicyConfig),
            numerics=_take(doc.get("numerics", {}), "numerics", NumericsConfig),
            sweep=_take(doc.get("sweep", {}), "sweep", SweepConfig),
            name=str(doc.get("name", "run")),
        )
        base.validate()

        curves = []
        for i, entry in enumerate(doc.get("curves", []) or []):
            if not isinstance(entry, dict) or "label" not in entry:
                raise ConfigError(f"curves[{i}]: each curve needs a 'label' mapping entry")
            overrides = {k: v for k, v in entry.items() if k != "label"}
            bad = set(overrides) - {"network", "fas", "content", "policy", "numerics"}
            if bad:
                raise ConfigError(f"curves[{i}]: cannot override {sorted(bad)}")
            merged = base.to_dict()
            merged.pop("curves")
            for section, values in overrides.items():
                if not isinstance(values, dict):
                    raise ConfigError(f"curves[{i}].{section}: must be a mapping")
                merged[section] = {**merged[section], **values}
            curve_cfg = RunConfig.from_dict(merged)
            curves.append((str(entry["label"]), curve_cfg))
        return replace(base, curves=tuple(curves))

    def to_dict(self) -> dict:
        doc = {
            "name": self.name,
            "network": asdict(self.network),
            "fas": asdict(self.fas),
            "content": asdict(self.content),
            "policy": {**asdict(self.policy), "probs": list(self.policy.probs)},
            "numerics": asdict(self.numerics),
            "sweep": {"axis": self.sweep.axis, "values": list(self.sweep.values)},
            "curves": [
                {"label": label, **{k: v for k, v in cfg.to_dict().items()
                                    if k in ("network", "fas", "content", "policy", "numerics")}}
                for label, cfg in self.curves
            ],
        }
        return doc

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def validate(self) -> None:
        if self.policy.kind not in ("top_k", "uniform", "scalar", "explicit"):
            raise ConfigError(
                f"policy.kind: unknown value {self.policy.kind!r}; "
                "expected top_k | uniform | scalar | explicit"
            )
        if self.sweep.axis not in SWEEP_AXES:
            raise ConfigError(f"sweep.axis: unknown value {self.sweep.axis!r}; expected one of {SWEEP_AXES}")
        if self.numerics.trials < 1:
            raise ConfigError("numerics.trials: must be >= 1")
        if not 1 <= self.numerics.quad_order <= 200:
            raise ConfigError("numerics.quad_order: must lie in [1, 200]")
        if self.numerics.mvn_tol <= 0:
            raise ConfigError("numerics.mvn_tol: must be positive")
        try:
            self.build_grid()
            self.build_params()
            self.build_policy()
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc

    # -- object assembly ---------------------------------------------------

    def build_params(self) -> NetworkParams:
        net = self.network
        return NetworkParams(
            sbs_intensity=net.sbs_intensity,
            tx_power=dbm_to_watts(net.tx_power_dbm),
            noise_power=dbm_to_watts(net.noise_dbm),
            pathloss_exp=net.pathloss_exp,
            pathloss_const=net.pathloss_const,
            snr_threshold=db_to_linear(net.eta_db),
            slot_time=net.slot_time,
            max_arq=net.max_arq,
        )

    def build_grid(self) -> PortGrid:
        return PortGrid(n1=self.fas.n1, n2=self.fas.n2, w1=self.fas.w1, w2=self.fas.w2)

    def build_catalog(self) -> ContentCatalog:
        return zipf_popularity(self.content.count, self.content.zipf_exp)

    def build_policy(self) -> CachePolicy:
        pol = self.policy
        count = self.content.count
        if pol.kind == "top_k":
            return policy_top_k(count, pol.capacity)
        if pol.kind == "uniform":
            return policy_uniform(count, pol.capacity)
        if pol.kind == "scalar":
            return policy_scalar(count, pol.q)
        probs = np.asarray(pol.probs, dtype=float)
        if probs.size != count:
            raise ConfigError(
                f"policy.probs: expected {count} entries to match content.count, got {probs.size}"
            )
        return CachePolicy(probs=probs, capacity=max(pol.capacity, math.ceil(probs.sum())))

    def curve_set(self) -> tuple:
        """(label, RunConfig) pairs; a single default curve when none given."""
        if self.curves:
            return self.curves
        return ((self.name, replace(self, curves=())),)

    def with_axis(self, value) -> "RunConfig":
        """This config with the sweep axis pinned to ``value``."""
        axis = self.sweep.axis
        if axis == "eta_db":
            return replace(self, network=replace(self.network, eta_db=float(value)))
        if axis == "mu_s":
            return replace(self, network=replace(self.network, sbs_intensity=float(value)))
        if axis == "q_scalar":
            return replace(self, policy=PolicyConfig(kind="scalar", q=float(value)))
        if axis == "M":
            return replace(self, network=replace(self.network, max_arq=int(value)))
        if axis == "N":
            side = math.isqrt(int(value))
            if side * side != int(value):
                raise ConfigError(f"sweep over N needs perfect squares, got {value}")
            return replace(self, fas=replace(self.fas, n1=side, n2=side))
        if axis == "W":
            return replace(self, fas=replace(self.fas, w1=float(value), w2=float(value)))
        raise ConfigError(f"unknown sweep axis {axis!r}")


def load_config(text: str, name_hint: str | None = None) -> RunConfig:
    """Parse a YAML document into a validated RunConfig."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"invalid YAML{where}: {exc}") from exc
    if doc is None:
        doc = {}
    if name_hint and "name" not in doc:
        doc["name"] = name_hint
    return RunConfig.from_dict(doc)
