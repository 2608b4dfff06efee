"""Property suite over the whole pipeline.

Each check re-derives one guarantee from scratch (closure, rendezvous
floors, cardinality, load, schedule validity, delay ceilings, repair
connectivity) and reports pass/fail with a counterexample when there
is one.  The CLI `verify` command and the service endpoint run the
same list; `fast` trims trial counts and topology sets for quick
interactive runs without changing what is asserted.
"""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass, field
from fractions import Fraction
from random import Random

from . import quorum as Q
from .scheduling import build_schedule, delay_bounds, validate_schedule
from .sim.engine import (auto_engaged, compare_to_bound,
                         physical_connectivity_check, run)
from .topology import InterferenceModel, Topology, build_tree


@dataclass
class CheckResult:
    name: str
    passed: bool
    cases: int                   # how many individual assertions ran
    detail: str
    elapsed_s: float = 0.0
    # structured side facts (mode counts and the like), not serialized
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed,
                "cases": self.cases, "detail": self.detail,
                "elapsed_s": round(self.elapsed_s, 3)}


@dataclass
class VerificationReport:
    results: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def elapsed_s(self) -> float:
        return sum(r.elapsed_s for r in self.results)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "elapsed_s": round(self.elapsed_s, 3),
                "checks": [r.to_dict() for r in self.results]}


CLOSURE_PERIODS = (4, 9, 16, 25, 36, 100)
BOUND_PERIODS = (36, 100)
DEMAND_GRID_STEP = Fraction(1, 20)

# the shared random-topology family for the schedule and delay checks
TOPOLOGY_FAMILY = {"n": 100, "area": 14.0, "radius": 2.0}


def _family_topologies(count: int, spec: dict | None = None):
    spec = spec or TOPOLOGY_FAMILY
    for seed in range(count):
        yield seed, Topology.random_geometric(
            spec["n"], area=spec["area"], radius=spec["radius"], seed=seed)


# --- closure and rendezvous ----------------------------------------------

def check_rotation_closure(periods=CLOSURE_PERIODS) -> CheckResult:
    """Every cross-quorum pair meets under every cyclic rotation."""
    t0 = time.time()
    cases = 0
    for m in periods:
        qs = Q.build_grid_qs(m)
        quorums = qs.all_cross_quorums()
        ok, witness = Q.verify_rotation_closure(quorums)
        cases += len(quorums) ** 2 * m
        if not ok:
            a, b, s = witness
            return CheckResult(
                "rotation_closure", False, cases,
                f"m={m}: quorums {a} and {b} miss at shift {s}",
                time.time() - t0)
    return CheckResult("rotation_closure", True, cases,
                       f"all pairs meet under all rotations for m in "
                       f"{list(periods)}", time.time() - t0)


def _demand_grid(step: Fraction = DEMAND_GRID_STEP) -> list[Q.Demand]:
    n = int(1 / step)
    return [Q.Demand(Fraction(k, n)) for k in range(1, n + 1)]


def check_rendezvous_floor(periods=BOUND_PERIODS, aligned: bool = True,
                           step: Fraction = DEMAND_GRID_STEP) -> CheckResult:
    """Worst-case meeting count never falls under the demand-product floor.

    aligned=True checks zero relative shift only; aligned=False takes
    the minimum over every rotation as well.
    """
    t0 = time.time()
    name = "rendezvous_floor_aligned" if aligned else "rendezvous_floor_shifted"
    cases = 0
    for m in periods:
        qs = Q.build_grid_qs(m)
        grid = _demand_grid(step)
        row_counts = sorted({Q.demand_rows(d, m) for d in grid})
        worst: dict[tuple[int, int], int] = {}
        for ru in row_counts:
            us = [qs.quorum(a, ru) for a in qs.anchors(ru)]
            for rv in row_counts:
                vs = [qs.quorum(a, rv) for a in qs.anchors(rv)]
                low = None
                for qu in us:
                    for qv in vs:
                        if aligned:
                            n = len(Q.rendezvous(qu, qv))
                        else:
                            n = Q.min_rendezvous_over_rotations(qu, qv)
                        if low is None or n < low:
                            low = n
                worst[(ru, rv)] = low
        for du in grid:
            for dv in grid:
                key = (Q.demand_rows(du, m), Q.demand_rows(dv, m))
                floor = (Q.sync_rendezvous_bound(du, dv, m) if aligned
                         else Q.async_rendezvous_bound(du, dv, m))
                cases += 1
                if worst[key] < floor:
                    return CheckResult(
                        name, False, cases,
                        f"m={m} demands {du.ratio}x{dv.ratio}: worst meeting "
                        f"count {worst[key]} under floor {floor}",
                        time.time() - t0)
    return CheckResult(name, True, cases,
                       f"floor held over the {float(step)}-step demand grid "
                       f"for m in {list(periods)}", time.time() - t0)


def check_quorum_cardinality(m: int = 100) -> CheckResult:
    """Quorums above the closure threshold have at least sqrt(m) slots,
    and an under-sized slot set provably fails closure."""
    t0 = time.time()
    side = Q.grid_side(m)
    threshold = Q.demand_lower_bound(m)
    cases = 0
    # walk the demand grid from just above the threshold upward
    grid = [d for d in _demand_grid() if float(d.ratio) >= threshold]
    qs = Q.build_grid_qs(m)
    for d in grid:
        rows = Q.demand_rows(d, m)
        for anchor in qs.anchors(rows):
            quo = Q.design_quorum(qs, anchor, d)
            cases += 1
            if len(quo) < side:
                return CheckResult(
                    "quorum_cardinality", False, cases,
                    f"demand {d.ratio} anchor {anchor}: {len(quo)} slots, "
                    f"under the {side} floor", time.time() - t0)
    # and the converse: fewer than sqrt(m) slots cannot close
    small = Q.Quorum(m, frozenset(range(side - 1)))
    ok, witness = Q.verify_rotation_closure([small])
    cases += 1
    if ok:
        return CheckResult(
            "quorum_cardinality", False, cases,
            f"a {side - 1}-slot set passed closure, expected a failure",
            time.time() - t0)
    return CheckResult(
        "quorum_cardinality", True, cases,
        f"all above-threshold quorums hold >= {side} slots; "
        f"a {side - 1}-slot set misses itself at shift {witness[2]}",
        time.time() - t0)


# --- load ----------------------------------------------------------------

def check_selection_load(m: int = 100, group_size: int = 5,
                         candidates: int = 5, trials: int = 1000,
                         seed: int = 20260823) -> CheckResult:
    """Monte-Carlo: uniform anchor picks stay under the analytic load
    ceiling plus three standard deviations, and never under the floor."""
    t0 = time.time()
    qs = Q.build_grid_qs(m)
    d = Q.Demand(Fraction(1, candidates))
    rows = Q.demand_rows(d, m)
    pool = [qs.quorum(a, rows) for a in qs.anchors(rows)][:candidates]
    floor = min(len(q) for q in pool) / m
    ceiling = Q.selection_load_ceiling(1, group_size)
    rng = Random(seed)
    peaks = []
    share = [1.0 / group_size] * group_size
    for _ in range(trials):
        picks = [pool[rng.randrange(len(pool))] for _ in range(group_size)]
        profile = Q.compute_load(picks, share)
        peaks.append(profile.max_load)
        if profile.max_access_frequency < floor:
            return CheckResult(
                "selection_load", False, len(peaks),
                f"trial {len(peaks)}: access frequency "
                f"{profile.max_access_frequency:.4f} under floor {floor:.4f}",
                time.time() - t0)
    sigma = statistics.pstdev(peaks)
    cap = ceiling + 3 * sigma
    worst = max(peaks)
    if worst > cap:
        return CheckResult(
            "selection_load", False, trials,
            f"peak load {worst:.4f} over ceiling {ceiling:.4f} + 3s "
            f"({cap:.4f})", time.time() - t0)
    return CheckResult(
        "selection_load", True, trials,
        f"{trials} trials: peak {worst:.4f} <= {ceiling:.4f} + 3x{sigma:.4f}, "
        f"floor {floor:.4f} respected", time.time() - t0)


def check_k_round_load(m: int = 10 ** 4, selectors: int = 100,
                       ks=(2, 4), trials: int = 1000,
                       seed: int = 20260823) -> CheckResult:
    """More retry rounds never worsen the peak bin load, and the
    measured peak stays within a factor two of the reference curve."""
    t0 = time.time()
    estimates = [Q.estimate_k_round_max_load(m, selectors, k, trials, seed)
                 for k in sorted(ks)]
    cases = trials * len(estimates)
    for a, b in zip(estimates, estimates[1:]):
        if b.mean_max_load > a.mean_max_load:
            return CheckResult(
                "k_round_load", False, cases,
                f"mean peak rose from {a.mean_max_load:.3f} (k={a.k}) to "
                f"{b.mean_max_load:.3f} (k={b.k})", time.time() - t0)
    for est in estimates:
        ref = est.reference_bound()
        if not ref / 2 <= est.mean_max_load <= 2 * ref:
            return CheckResult(
                "k_round_load", False, cases,
                f"k={est.k}: mean peak {est.mean_max_load:.3f} outside "
                f"[{ref / 2:.3f}, {2 * ref:.3f}]", time.time() - t0)
    pretty = ", ".join(f"k={e.k}: {e.mean_max_load:.3f}" for e in estimates)
    return CheckResult("k_round_load", True, cases,
                       f"mean peaks non-increasing and within 2x of the "
                       f"reference ({pretty})", time.time() - t0)


# --- schedule pipeline ---------------------------------------------------

def check_schedule_pipeline(count: int = 20,
                            family: dict | None = None) -> CheckResult:
    """Random layouts all produce violation-free schedules where every
    node transmits before its parent forwards."""
    t0 = time.time()
    model = InterferenceModel.rts_cts()
    cases = 0
    for seed, topo in _family_topologies(count, family):
        tree = build_tree(topo)
        schedule = build_schedule(topo, model=model)
        report = validate_schedule(schedule, topo, tree, model)
        cases += 1
        if not report.ok:
            return CheckResult(
                "schedule_pipeline", False, cases,
                f"layout seed {seed}: {report.violations[0]}",
                time.time() - t0)
    return CheckResult("schedule_pipeline", True, cases,
                       f"{count} random layouts validate cleanly",
                       time.time() - t0)


def _leaf_rotation_vector(topo: Topology, tree, schedule,
                          seed: int) -> dict[int, int] | None:
    """A shift vector that stays out of the repair regime.

    Rotating one childless node within its period keeps every other
    pair aligned; if the rotation also preserves that node's own
    rendezvous, no engagement fires and the run exercises the
    plain-rotation delay ceiling.  Returns None when the layout needs
    repair even at zero shift, or no tried rotation survives.
    """
    if auto_engaged(schedule, tree, topo, {u: 0 for u in topo.nodes}):
        return None
    m = schedule.m
    kids = tree.children()
    rng = Random(f"{seed}:rotation")
    leaves = sorted(u for u in tree.parent if not kids.get(u))
    for u in leaves[:12]:
        for r in sorted(rng.sample(range(1, m), min(8, m - 1))):
            vec = {x: 0 for x in topo.nodes}
            vec[u] = r
            if not auto_engaged(schedule, tree, topo, vec):
                return vec
    return None


def _shift_vectors(topo: Topology, S: int, m: int, how_many: int,
                   seed: int, tree=None, schedule=None
                   ) -> list[dict[int, int]]:
    """Zero vector, one uniform whole-period displacement (keeps every
    pair aligned, so no engagement fires), one single-node rotation
    that dodges repair where the layout allows it, then seeded mixes of
    period-multiples and unrestricted offsets."""
    rng = Random(f"{seed}:shifts")
    common = rng.randrange(1, S // m) * m
    vectors = [{u: 0 for u in topo.nodes},
               {u: common for u in topo.nodes}]
    if tree is not None and schedule is not None:
        rot = _leaf_rotation_vector(topo, tree, schedule, seed)
        if rot is not None:
            vectors.append(rot)
    while len(vectors) < how_many:
        if len(vectors) % 2:
            vec = {u: rng.randrange(0, S // m) * m for u in topo.nodes}
        else:
            vec = {u: rng.randrange(0, S) for u in topo.nodes}
        vectors.append(vec)
    return vectors[:how_many]


def check_delay_ceiling(count: int = 20, vectors: int = 5,
                        family: dict | None = None) -> CheckResult:
    """Measured aggregation delay never exceeds the mode's ceiling."""
    t0 = time.time()
    model = InterferenceModel.rts_cts()
    cases = 0
    modes: dict[str, int] = {}
    for seed, topo in _family_topologies(count, family):
        tree = build_tree(topo)
        schedule = build_schedule(topo, model=model)
        S = schedule.phi * schedule.m
        bounds = delay_bounds(tree, schedule.phi, schedule.m)
        for vec in _shift_vectors(topo, S, schedule.m, vectors, seed,
                                  tree=tree, schedule=schedule):
            engaged = auto_engaged(schedule, tree, topo, vec)
            report = run(schedule, topo, traffic_mode="aggregate",
                         shifts=vec, engaged=engaged, tree=tree,
                         model=model)
            cases += 1
            modes[report.mode] = modes.get(report.mode, 0) + 1
            if not compare_to_bound(report, bounds):
                return CheckResult(
                    "delay_ceiling", False, cases,
                    f"layout seed {seed}, mode {report.mode}: delay "
                    f"{report.aggregation_delay} over "
                    f"{bounds.for_mode(report.mode)} "
                    f"(complete={report.aggregation_complete})",
                    time.time() - t0, extras={"modes": modes})
    mix = ", ".join(f"{k} {v}" for k, v in sorted(modes.items()))
    return CheckResult("delay_ceiling", True, cases,
                       f"{cases} runs stayed under their mode ceilings ({mix})",
                       time.time() - t0, extras={"modes": modes})


# --- repair connectivity -------------------------------------------------

def _adversarial_vectors(topo: Topology, S: int, m: int, phi: int,
                         seed: int) -> list[dict[int, int]]:
    rng = Random(f"{seed}:adversarial")
    nodes = sorted(topo.nodes)
    return [
        {u: 0 for u in nodes},
        # whole-period displacements, the degenerate residue class
        {u: m for u in nodes},
        {u: (u % phi) * m for u in nodes},
        # land each node one slot short of a window edge
        {u: ((u % phi) + 1) * m - 1 for u in nodes},
        {u: rng.randrange(0, S) for u in nodes},
        {u: rng.randrange(0, S // m) * m for u in nodes},
    ]


def check_repair_connectivity(count: int = 5,
                              family: dict | None = None,
                              k: int = 2) -> CheckResult:
    """After automatic engagement every neighbor pair can still meet."""
    t0 = time.time()
    spec = family or {"n": 25, "area": 10.0, "radius": 2.6}
    cases = 0
    for seed in range(count):
        topo = Topology.random_geometric(
            spec["n"], area=spec["area"], radius=spec["radius"], seed=seed)
        tree = build_tree(topo)
        schedule = build_schedule(topo)
        S = schedule.phi * schedule.m
        for vec in _adversarial_vectors(topo, S, schedule.m,
                                        schedule.phi, seed):
            engaged = auto_engaged(schedule, tree, topo, vec, k)
            for a, b in topo.edges():
                if tree.parent.get(a) == b:
                    pairs = [(a, b)]       # data flows child to parent
                elif tree.parent.get(b) == a:
                    pairs = [(b, a)]
                else:
                    pairs = [(a, b), (b, a)]
                for u, v in pairs:
                    res = physical_connectivity_check(
                        u, v, schedule, tree, vec, engaged=engaged, k=k)
                    cases += 1
                    if not res.ok:
                        return CheckResult(
                            "repair_connectivity", False, cases,
                            f"layout seed {seed}: pair ({u},{v}) still "
                            f"apart after engaging {sorted(engaged)}",
                            time.time() - t0)
    return CheckResult("repair_connectivity", True, cases,
                       f"{cases} pair checks pass after engagement",
                       time.time() - t0)


# --- the suite -----------------------------------------------------------

def run_verification(fast: bool = False) -> VerificationReport:
    if fast:
        checks = [
            check_rotation_closure(),
            check_rendezvous_floor(periods=(36,)),
            check_rendezvous_floor(periods=(36,), aligned=False),
            check_quorum_cardinality(),
            check_selection_load(trials=200),
            check_k_round_load(trials=100),
            check_schedule_pipeline(count=5),
            check_delay_ceiling(count=3, vectors=3),
            check_repair_connectivity(count=2),
        ]
    else:
        checks = [
            check_rotation_closure(),
            check_rendezvous_floor(),
            check_rendezvous_floor(aligned=False),
            check_quorum_cardinality(),
            check_selection_load(),
            check_k_round_load(),
            check_schedule_pipeline(),
            check_delay_ceiling(),
            check_repair_connectivity(),
        ]
    return VerificationReport(results=checks)
