"""Paired MAC comparisons over a slot-size by generation-period matrix.

One row per run; medians across seeds feed the trend checks.  The
quorum MAC rows reuse one prebuilt schedule per topology, and with
zero shifts they do not depend on the seed at all; the listening
baseline draws its backoff jitter from the seed.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
from concurrent.futures import ProcessPoolExecutor
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from scipy.stats import spearmanr

from ..scheduling import build_schedule, validate_schedule
from ..topology import InterferenceModel, build_tree
from .config import (ConfigError, GeneratorSpec, MacSpec, RadioSpec,
                     SimConfig, TopologySpec, TrafficSpec, load_config,
                     resolve_topology)
from .engine import run
from .lpl import run_lpl

DEFAULT_SLOTS = [50, 1000, 2000, 5000]
DEFAULT_GENS = [20, 50, 100, 200, 300, 500, 800, 1000, 1500, 2000]


def _default_topology() -> TopologySpec:
    # a small connected layout keeps the whole matrix affordable while
    # still spanning several hops
    return TopologySpec(
        generator=GeneratorSpec(n=10, area=8.0, radius=3.0, seed=0))


class SweepMatrix(BaseModel):
    model_config = ConfigDict(extra="forbid")

    topology: TopologySpec = Field(default_factory=_default_topology)
    m: int = Field(default=100, ge=4)
    slot_sizes_ms: list[int] = Field(default_factory=lambda: list(DEFAULT_SLOTS))
    generation_periods_ms: list[int] = Field(
        default_factory=lambda: list(DEFAULT_GENS))
    macs: list[Literal["adc", "lpl"]] = Field(
        default_factory=lambda: ["adc", "lpl"])
    seeds: list[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4])
    superframes: int = Field(default=3, ge=1)
    radio: RadioSpec = Field(default_factory=RadioSpec)
    lpl: MacSpec = Field(default_factory=lambda: MacSpec(kind="lpl"))

    def to_dict(self) -> dict:
        return self.model_dump(mode="json")


def load_matrix(source: str | bytes | dict) -> SweepMatrix:
    try:
        if isinstance(source, (str, bytes)):
            source = json.loads(source)
        return SweepMatrix.model_validate(source)
    except (json.JSONDecodeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


ROW_FIELDS = ["mac", "slot_ms", "generation_period_ms", "seed",
              "duration_slots", "generated", "delivered", "lost",
              "in_flight", "throughput", "prr", "link_prr",
              "collision_count"]


def _row(report) -> dict:
    d = report.to_dict()
    row = {k: d.get(k) for k in ROW_FIELDS}
    row["generation_period_ms"] = d["config"].get(
        "traffic", {}).get("generation_period_ms")
    return row


def _cell_config(matrix: SweepMatrix, slot_ms: int, gen_ms: int,
                 mac: str, seed: int, duration: int) -> SimConfig:
    mac_spec = matrix.lpl.model_copy() if mac == "lpl" else MacSpec(kind="adc")
    return SimConfig(
        topology=matrix.topology, m=matrix.m, slot_ms=slot_ms,
        mac=mac_spec,
        traffic=TrafficSpec(mode="raw", generation_period_ms=gen_ms),
        radio=matrix.radio, duration_slots=duration, seed=seed)


def run_cell(matrix_doc: dict, slot_ms: int, gen_ms: int, mac: str,
             seed: int) -> dict:
    """Standalone single-cell runner; rebuilds everything (picklable)."""
    matrix = load_matrix(matrix_doc)
    rows = _run_cells(matrix, [(slot_ms, gen_ms, mac, seed)])
    return rows[0]


def _run_cells(matrix: SweepMatrix,
               cells: list[tuple[int, int, str, int]]) -> list[dict]:
    topology = resolve_topology(
        SimConfig(topology=matrix.topology, duration_slots=1))
    tree = build_tree(topology)
    model = InterferenceModel.rts_cts()
    schedule = None
    if any(mac == "adc" for _, _, mac, _ in cells):
        schedule = build_schedule(topology, model=model, m=matrix.m)
        check = validate_schedule(schedule, topology, tree, model)
        if not check.ok:
            raise ConfigError("sweep schedule failed validation")
    S = (schedule.phi * schedule.m) if schedule else 2 * matrix.m
    duration = matrix.superframes * S
    out = []
    for slot_ms, gen_ms, mac, seed in cells:
        cfg = _cell_config(matrix, slot_ms, gen_ms, mac, seed, duration)
        if mac == "adc":
            report = run(
                schedule, topology, traffic_mode="raw",
                generation_period_ms=gen_ms, slot_ms=slot_ms,
                guard_ms=matrix.radio.guard_ms,
                wakeup_ms=matrix.radio.wakeup_ms,
                unit_airtime_ms=matrix.radio.unit_airtime_ms,
                duration_slots=duration, model=model, tree=tree,
                seed=seed, config_echo=cfg.to_dict())
        else:
            report = run_lpl(topology, tree, cfg, duration)
        out.append(_row(report))
    return out


def run_baseline_comparison(matrix: SweepMatrix,
                            jobs: int = 1) -> list[dict]:
    """Full matrix of paired runs; one dict per (slot, gen, mac, seed)."""
    cells = [(s, g, mac, seed)
             for s in matrix.slot_sizes_ms
             for g in matrix.generation_periods_ms
             for mac in matrix.macs
             for seed in matrix.seeds]
    if jobs <= 1:
        return _run_cells(matrix, cells)
    doc = matrix.to_dict()
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(run_cell, doc, *cell) for cell in cells]
        return [f.result() for f in futures]


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=ROW_FIELDS)
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def summarize_medians(rows: list[dict], value: str = "throughput"
                      ) -> dict[tuple[str, int, int], float]:
    """Median of one metric over seeds, keyed (mac, slot_ms, gen_ms)."""
    groups: dict[tuple[str, int, int], list[float]] = {}
    for row in rows:
        key = (row["mac"], row["slot_ms"], row["generation_period_ms"])
        if row[value] is not None:
            groups.setdefault(key, []).append(row[value])
    return {k: statistics.median(v) for k, v in sorted(groups.items())}


# --- trend checks ---------------------------------------------------------

def trend_large_slot_advantage(med: dict, slots=(1000, 2000, 5000),
                               max_gen: int = 500) -> bool:
    """Quorum MAC beats the baseline on big slots under fast generation."""
    cells = [(s, g) for (mac, s, g) in med if mac == "adc"
             and s in slots and g <= max_gen]
    return bool(cells) and all(
        med[("adc", s, g)] > med[("lpl", s, g)] for s, g in cells)


def trend_small_slot_baseline(med: dict, slot: int = 50) -> bool:
    """Baseline holds its own at the smallest slot for half the periods."""
    gens = sorted({g for (mac, s, g) in med if mac == "lpl" and s == slot})
    if not gens:
        return False
    wins = sum(1 for g in gens
               if med[("lpl", slot, g)] >= med[("adc", slot, g)])
    return wins * 2 >= len(gens)


def trend_prr_monotone(prr_med: dict, rho_min: float = 0.8
                       ) -> dict[str, float]:
    """Spearman correlation of pooled PRR against the generation period."""
    out = {}
    for mac in ("adc", "lpl"):
        gens = sorted({g for (m, _, g) in prr_med if m == mac})
        series = []
        for g in gens:
            vals = [prr_med[(m, s, gg)] for (m, s, gg) in prr_med
                    if m == mac and gg == g]
            series.append(statistics.median(vals))
        rho = spearmanr(gens, series).statistic if len(gens) > 2 else 0.0
        out[mac] = float(rho)
    return out


def trend_throughput_ranges(med: dict) -> dict[str, float]:
    """Spread of per-slot-size typical throughput, one number per MAC."""
    out = {}
    for mac in ("adc", "lpl"):
        slots = sorted({s for (m, s, _) in med if m == mac})
        per_slot = []
        for s in slots:
            vals = [med[(m, ss, g)] for (m, ss, g) in med
                    if m == mac and ss == s]
            per_slot.append(statistics.median(vals))
        out[mac] = (max(per_slot) - min(per_slot)) if per_slot else 0.0
    return out
