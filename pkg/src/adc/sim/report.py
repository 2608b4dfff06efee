"""Run results.  Serialization is canonical so that equal runs produce
byte-identical JSON; anything nondeterministic (wall time) stays out.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class SimReport:
    mac: str
    mode: str                     # sync | async | share (adc), lpl otherwise
    seed: int
    duration_slots: int
    slot_ms: int
    generated: int
    delivered: int
    lost: int
    in_flight: int
    # packets per second at the sink; raw runs measure this on the
    # steady-state window (last two thirds), totals below stay whole-run
    throughput: float
    prr: float
    aggregation_delay: int | None
    aggregation_complete: bool
    collision_count: int
    same_slot_conflicts: int
    rendezvous_histogram: dict[str, int]
    active_slot_fraction: dict[str, float]
    connectivity_ok: bool
    engaged: list[int]
    link_prr: float | None = None
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.prr <= 1.0:
            raise ValueError(f"prr {self.prr} outside [0, 1]")
        for node, duty in self.active_slot_fraction.items():
            if not 0.0 < duty <= 1.0:
                raise ValueError(f"node {node} duty cycle {duty} outside (0, 1]")
        if self.generated != self.delivered + self.lost + self.in_flight:
            raise ValueError(
                f"conservation broken: {self.generated} generated vs "
                f"{self.delivered} + {self.lost} + {self.in_flight}")

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["rendezvous_histogram"] = dict(sorted(self.rendezvous_histogram.items()))
        d["active_slot_fraction"] = {
            k: round(v, 9) for k, v in sorted(self.active_slot_fraction.items())}
        d["throughput"] = round(self.throughput, 9)
        d["prr"] = round(self.prr, 9)
        if self.link_prr is not None:
            d["link_prr"] = round(self.link_prr, 9)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SimReport":
        return cls(**json.loads(text))
