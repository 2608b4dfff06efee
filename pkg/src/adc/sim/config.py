"""Run configuration: one JSON document describes one simulation.

Everything time-valued is given in milliseconds and converted to whole
slots at load time; clock shifts are whole slots already.
"""

from __future__ import annotations

import json
from random import Random
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..topology import Topology


class ConfigError(ValueError):
    """The run configuration is inconsistent or unreadable."""


class _Spec(BaseModel):
    # unknown keys are a config mistake, not something to skip quietly
    model_config = ConfigDict(extra="forbid")


class GeneratorSpec(_Spec):
    n: int = Field(ge=2)
    area: float = Field(gt=0)
    radius: float = Field(gt=0)
    seed: int = 0


class TopologySpec(_Spec):
    """Exactly one of path, edges or generator."""

    path: str | None = None
    edges: list[tuple[int, int]] | None = None
    sink: int | None = None
    generator: GeneratorSpec | None = None

    @model_validator(mode="after")
    def _one_source(self):
        given = [x is not None for x in (self.path, self.edges, self.generator)]
        if sum(given) != 1:
            raise ValueError("give exactly one of path, edges or generator")
        return self


class ClockSpec(_Spec):
    mode: Literal["zero", "uniform", "fixed"] = "zero"
    bound: int | None = Field(default=None, ge=0)  # uniform draws in [-bound, bound]
    shifts: dict[int, int] = Field(default_factory=dict)
    drift: dict[int, int] = Field(default_factory=dict)  # slots per superframe

    @model_validator(mode="after")
    def _fixed_needs_shifts(self):
        if self.mode == "fixed" and not self.shifts:
            raise ValueError("fixed clock mode needs an explicit shift vector")
        return self


class TrafficSpec(_Spec):
    mode: Literal["aggregate", "raw"] = "aggregate"
    generation_period_ms: int = Field(default=1000, gt=0)
    payload: int = Field(default=1, gt=0)


class MacSpec(_Spec):
    kind: Literal["adc", "lpl", "lpl_baseline"] = "adc"
    check_interval_ms: int = Field(default=50, gt=0)
    preamble_ms: int = Field(default=50, gt=0)
    backoff_window_ms: int = Field(default=240, gt=0)
    # clear-channel assessment blind window: a transmission younger than
    # this cannot be sensed yet, so near-simultaneous starts collide
    cca_ms: int = Field(default=8, ge=0)
    poll_duty: float = Field(default=0.2, gt=0, le=1)
    # None sizes the buffer to the slot's packet capacity at run time
    queue_cap: int | None = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _normalize(self):
        if self.kind == "lpl_baseline":
            self.kind = "lpl"
        if self.kind == "lpl" and self.preamble_ms < self.check_interval_ms:
            # a shorter preamble can fall entirely between two polls
            raise ValueError("preamble must be at least the check interval")
        return self


class ShareSpec(_Spec):
    mode: Literal["off", "auto", "fixed"] = "off"
    k: int = Field(default=2, ge=2)
    engaged: list[int] = Field(default_factory=list)


class RadioSpec(_Spec):
    guard_ms: int = Field(default=8, ge=0)
    # radio startup and settling cost paid once per active slot; a fixed
    # bite that hardly matters at 1 s slots but eats a 50 ms slot
    wakeup_ms: int = Field(default=10, ge=0)
    unit_airtime_ms: int = Field(default=2, gt=0)


class InterferenceSpec(_Spec):
    kind: Literal["rts_cts", "protocol"] = "rts_cts"
    ratio: float = Field(default=1.0, ge=1.0)  # interference over comm range


class SimConfig(_Spec):
    topology: TopologySpec
    m: int | None = Field(default=None, ge=1)
    slot_ms: int = Field(default=1000, gt=0)
    mac: MacSpec = Field(default_factory=MacSpec)
    clock: ClockSpec = Field(default_factory=ClockSpec)
    traffic: TrafficSpec = Field(default_factory=TrafficSpec)
    share: ShareSpec = Field(default_factory=ShareSpec)
    radio: RadioSpec = Field(default_factory=RadioSpec)
    interference: InterferenceSpec = Field(default_factory=InterferenceSpec)
    duration_slots: int | None = Field(default=None, gt=0)
    superframes: int | None = Field(default=None, gt=0)
    selection: Literal["determinate", "random"] = "determinate"
    k_retries: int = Field(default=1, ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def _duration(self):
        if self.duration_slots is not None and self.superframes is not None:
            raise ValueError("give duration_slots or superframes, not both")
        if (self.traffic.mode == "raw"
                and self.duration_slots is None and self.superframes is None):
            raise ValueError("raw traffic needs an explicit duration")
        return self

    def to_dict(self) -> dict:
        return self.model_dump(mode="json")

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def load_config(source: str | bytes | dict) -> SimConfig:
    """Parse and validate a config document; raises ConfigError."""
    try:
        if isinstance(source, (str, bytes)):
            source = json.loads(source)
        return SimConfig.model_validate(source)
    except (json.JSONDecodeError, ValidationError) as exc:
        raise ConfigError(str(exc)) from exc


def resolve_topology(source: "SimConfig | TopologySpec") -> Topology:
    spec = source.topology if isinstance(source, SimConfig) else source
    if spec.path is not None:
        with open(spec.path) as fh:
            return Topology.from_edge_list(fh.read())
    if spec.edges is not None:
        nodes = sorted({u for e in spec.edges for u in e})
        sink = spec.sink if spec.sink is not None else nodes[0]
        return Topology(spec.edges, sink=sink)
    g = spec.generator
    return Topology.random_geometric(g.n, g.area, g.radius, seed=g.seed)


def _tagged_rng(seed: int, tag: str) -> Random:
    # string seeds hash stably (sha512 path), unlike tuple seeds
    return Random(f"{seed}:{tag}")


def resolve_shifts(cfg: SimConfig, topology: Topology,
                   superframe: int) -> dict[int, int]:
    """Per-node slot offsets at t=0.  Local clock = real time + shift."""
    spec = cfg.clock
    if spec.mode == "zero":
        return {u: 0 for u in topology.nodes}
    if spec.mode == "fixed":
        missing = [u for u in topology.nodes if u not in spec.shifts]
        if missing:
            raise ConfigError(f"fixed shifts missing nodes {missing[:5]}")
        return {u: spec.shifts[u] for u in topology.nodes}
    bound = spec.bound if spec.bound is not None else superframe
    rng = _tagged_rng(cfg.seed, "clock")
    return {u: rng.randint(-bound, bound) for u in sorted(topology.nodes)}
