"""Wakeup schedules: period windows per region, quorums per node.

A superframe is a run of phi consecutive periods.  Every region owns
the window equal to its color; deeper regions start strictly earlier
than the regions their centers report to, so data can climb one level
per superframe without waiting a lap.  Inside a region each member
holds a cross quorum, handed out children first, so sibling
transmissions never collide on a slot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from random import Random

from .quorum import (AnchorRangeError, Demand, GridQuorumSystem, Quorum,
                     build_grid_qs, demand_rows, is_occupied, rendezvous)
from .topology import (AggregationTree, InterferenceModel, Region, Topology,
                       build_tree, color_regions, extract_regions,
                       region_conflict_map)


class AnchorShortageError(ValueError):
    """A region needs more grid anchors than the period side provides."""


@dataclass(frozen=True)
class SlotWindow:
    """Which period of the superframe a region wakes in.

    start_period is the first absolute period the region is active;
    it is congruent to window_index modulo phi and strictly larger
    than every child region's start, which yields the child-before-
    parent order.  superframe_stride is phi times the share factor k
    (k=1 unless quorum share engages).
    """

    region_id: int
    window_index: int
    start_period: int
    superframe_stride: int


@dataclass(frozen=True)
class NodeAssignment:
    """One node's quorum inside one region."""

    node: int
    region_id: int
    anchor: int
    rows: int
    slots: tuple[int, ...]

    def quorum(self, m: int) -> Quorum:
        return Quorum(m, frozenset(self.slots), anchor=self.anchor, rows=self.rows)


@dataclass(frozen=True)
class RegionSchedule:
    region_id: int
    center: int
    color: int
    window: SlotWindow
    members: tuple[int, ...]


@dataclass
class Schedule:
    """Complete wakeup assignment for a topology."""

    m: int
    phi: int
    regions: dict[int, RegionSchedule]
    assignments: list[NodeAssignment]

    def __post_init__(self):
        self._by_node: dict[int, list[NodeAssignment]] = {}
        self._by_region: dict[int, dict[int, NodeAssignment]] = {}
        for a in self.assignments:
            self._by_node.setdefault(a.node, []).append(a)
            self._by_region.setdefault(a.region_id, {})[a.node] = a

    @property
    def side(self) -> int:
        return math.isqrt(self.m - 1) + 1

    def node_assignments(self, node: int) -> list[NodeAssignment]:
        return list(self._by_node.get(node, []))

    def assignment(self, node: int, region_id: int) -> NodeAssignment:
        return self._by_region[region_id][node]

    def region_of_center(self, center: int) -> RegionSchedule:
        for rs in self.regions.values():
            if rs.center == center:
                return rs
        raise KeyError(f"no region centered at {center}")

    def nodes(self) -> list[int]:
        return sorted(self._by_node)

    def link_slots(self, node: int, parent: int) -> tuple[int, list[int]]:
        """Region id and in-period slots designated for node -> parent."""
        rs = self.region_of_center(parent)
        qu = self.assignment(node, rs.region_id).quorum(self.m)
        qp = self.assignment(parent, rs.region_id).quorum(self.m)
        return rs.region_id, sorted(rendezvous(qu, qp))


def effective_phi(model_phi: int, chi: int) -> int:
    """Superframe length: the color count, but never below the hop radius.

    The greedy palette can exceed the interference parameter on dense
    graphs; conflicting regions must keep distinct windows, so the
    superframe stretches to fit every color.
    """
    return max(1, model_phi, chi)


def assign_slot_windows(regions: list[Region], tree: AggregationTree,
                        phi: int) -> dict[int, SlotWindow]:
    """Give every region a start period honoring child-before-parent order.

    Regions are processed deepest center first.  Each takes the
    smallest period congruent to its window that lies strictly after
    all starts of regions whose centers report to its center.
    """
    by_center = {r.center: r for r in regions}
    children: dict[int, list[Region]] = {r.id: [] for r in regions}
    for r in regions:
        p = tree.parent.get(r.center)
        if p is not None:
            children[by_center[p].id].append(r)
    starts: dict[int, int] = {}
    windows: dict[int, SlotWindow] = {}
    for r in sorted(regions, key=lambda r: (-tree.level[r.center], r.center)):
        if r.color is None:
            raise ValueError(f"region {r.id} is uncolored")
        w = r.color % phi
        kids = children[r.id]
        if kids:
            base = max(starts[k.id] for k in kids) + 1
            start = base + ((w - base) % phi)
        else:
            start = w
        starts[r.id] = start
        windows[r.id] = SlotWindow(region_id=r.id, window_index=w,
                                   start_period=start, superframe_stride=phi)
    return windows


def _member_order(region: Region, tree: AggregationTree) -> list[int]:
    """Anchor hand-out order: lower levels (children) first, then ids."""
    k = tree.level[region.center]
    below = sorted(u for u in region.members if tree.level[u] == k + 1)
    same = sorted(u for u in region.members if tree.level[u] == k)
    above = sorted(u for u in region.members if tree.level[u] == k - 1)
    return below + same + above


def determinate_quorum_selection(region: Region, tree: AggregationTree,
                                 qs: GridQuorumSystem,
                                 demands: dict[int, Demand] | None = None
                                 ) -> dict[int, Quorum]:
    """Deterministic per-member anchors: children first, ascending id.

    Members get consecutive anchor blocks sized by their demand (one
    row each when no demands are given).  Earlier members therefore
    hold strictly earlier first slots than the center.
    """
    order = _member_order(region, tree)
    out: dict[int, Quorum] = {}
    cursor = 1
    for u in order:
        rows = demand_rows(demands[u], qs.m) if demands and u in demands else 1
        if cursor + rows - 1 > qs.side:
            raise AnchorShortageError(
                f"region {region.id} (center {region.center}) needs anchor "
                f"{cursor}+{rows} rows but the grid side is {qs.side}; "
                f"use a period of at least {len(order)}^2 slots")
        out[u] = qs.quorum(cursor, rows)
        cursor += rows
    return out


def random_quorum_selection(region: Region, qs: GridQuorumSystem,
                            demands: dict[int, Demand], k: int,
                            seed: int) -> dict[int, Quorum]:
    """Uniform anchor picks with up to k redraws on occupied quorums.

    Members commit in ascending id order and remember earlier picks;
    a pick counts as occupied when its overlap with a committed quorum
    exceeds the zero-shift rendezvous guarantee.  After k failed
    redraws a member keeps its last pick.
    """
    if k < 1:
        raise ValueError("retry budget must be at least 1")
    rng = Random(seed)
    members = sorted(region.members)
    rows = {u: demand_rows(demands[u], qs.m) for u in members}
    widest = max(rows.values())
    if len(members) > qs.max_anchor(widest):
        raise AnchorShortageError(
            f"region {region.id}: {len(members)} members but only "
            f"{qs.max_anchor(widest)} anchors at {widest} rows")
    taken: list[tuple[int, Quorum]] = []  # (member, quorum) in commit order
    out: dict[int, Quorum] = {}
    for u in members:
        r = rows[u]
        top = qs.max_anchor(r)
        pick = qs.quorum(rng.randrange(1, top + 1), r)
        retries = 0
        while retries < k and any(
                is_occupied(pick, q, demands[u], demands[v]) for v, q in taken):
            pick = qs.quorum(rng.randrange(1, top + 1), r)
            retries += 1
        taken.append((u, pick))
        out[u] = pick
    return out


@dataclass(frozen=True)
class DelayBound:
    """Worst-case slots for one aggregation wave to reach the sink."""

    phi: int
    m: int
    radius: int
    max_degree: int

    @property
    def sync_bound(self) -> int:
        return self.phi * self.m * self.radius + self.max_degree ** 2

    @property
    def async_bound(self) -> int:
        return (2 * self.phi - 1) * self.m * self.radius + self.max_degree ** 2

    @property
    def share_bound(self) -> int:
        return self.phi ** 2 * self.m * self.radius + self.max_degree ** 2

    @property
    def centered_bound(self) -> int:
        """Refinement when the sink sits centrally: depth about radius/2."""
        d = math.ceil(self.radius / 2)
        return (self.phi * self.m + 1) * d + self.max_degree ** 2

    def for_mode(self, mode: str) -> int:
        return {"sync": self.sync_bound, "async": self.async_bound,
                "share": self.share_bound}[mode]


def delay_bounds(tree: AggregationTree, phi: int, m: int) -> DelayBound:
    return DelayBound(phi=phi, m=m, radius=tree.radius,
                      max_degree=tree.max_degree)


def auto_period(topology: Topology, tree: AggregationTree | None = None) -> int:
    """Smallest square period whose grid side fits the largest region."""
    if tree is None:
        tree = build_tree(topology)
    largest = max((topology.degree(c) + 1 for c in tree.cds), default=1)
    side = max(2, largest)
    return side * side


def build_schedule(topology: Topology,
                   model: InterferenceModel | None = None,
                   m: int | None = None,
                   slot_duration: float = 1.0,
                   selection: str = "determinate",
                   demands: dict[int, Demand] | None = None,
                   k_retries: int = 1,
                   seed: int = 0) -> Schedule:
    """Full pipeline: tree, regions, colors, windows, quorums."""
    model = model or InterferenceModel.rts_cts()
    tree = build_tree(topology)
    regions = extract_regions(tree, topology)
    colored, chi = color_regions(regions, topology, model)
    phi = effective_phi(model.phi, chi)
    if m is None:
        m = auto_period(topology, tree)
    qs = build_grid_qs(m, slot_duration)
    windows = assign_slot_windows(colored, tree, phi)
    assignments: list[NodeAssignment] = []
    region_entries: dict[int, RegionSchedule] = {}
    for r in colored:
        if selection == "determinate":
            picks = determinate_quorum_selection(r, tree, qs, demands)
        elif selection == "random":
            if demands is None:
                demands_r = {u: Demand(1, qs.side) for u in r.members}
            else:
                demands_r = {u: demands[u] for u in r.members}
            picks = random_quorum_selection(r, qs, demands_r,
                                            k_retries, seed + r.id)
        else:
            raise ValueError(f"unknown selection mode {selection!r}")
        region_entries[r.id] = RegionSchedule(
            region_id=r.id, center=r.center, color=r.color,
            window=windows[r.id], members=tuple(sorted(r.members)))
        for u in sorted(picks):
            q = picks[u]
            assignments.append(NodeAssignment(
                node=u, region_id=r.id, anchor=q.anchor, rows=q.rows,
                slots=tuple(q.sorted_slots())))
    return Schedule(m=m, phi=phi, regions=region_entries,
                    assignments=assignments)


# --- validation -----------------------------------------------------------

@dataclass
class ScheduleValidation:
    """Outcome of the static conflict and ordering checks."""

    window_violations: list[str] = field(default_factory=list)
    transmitter_violations: list[str] = field(default_factory=list)
    ordering_violations: list[str] = field(default_factory=list)

    @property
    def violations(self) -> list[str]:
        return (self.window_violations + self.transmitter_violations
                + self.ordering_violations)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_schedule(schedule: Schedule, topology: Topology,
                      tree: AggregationTree,
                      model: InterferenceModel) -> ScheduleValidation:
    """Check window separation, per-slot transmitter uniqueness, ordering."""
    report = ScheduleValidation()
    regions = [Region(id=rs.region_id, center=rs.center,
                      members=frozenset(rs.members), color=rs.color)
               for rs in schedule.regions.values()]
    conflict = region_conflict_map(regions, topology, model)
    for rid in sorted(conflict):
        for other in sorted(conflict[rid]):
            if other <= rid:
                continue
            wa = schedule.regions[rid].window
            wb = schedule.regions[other].window
            if wa.window_index == wb.window_index:
                report.window_violations.append(
                    f"regions {rid} and {other} interfere but share "
                    f"window {wa.window_index}")

    # one designated transmitter per in-period slot per region
    children = tree.children()
    earliest: dict[int, int] = {}
    for rs in schedule.regions.values():
        claimed: dict[int, int] = {}
        for u in children.get(rs.center, []):
            _, slots = schedule.link_slots(u, rs.center)
            if slots:
                earliest[u] = rs.window.start_period * schedule.m + slots[0]
            for s in slots:
                if s in claimed:
                    report.transmitter_violations.append(
                        f"region {rs.region_id}: slot {s} designated for both "
                        f"node {claimed[s]} and node {u}")
                else:
                    claimed[s] = u

    for u in sorted(tree.parent):
        p = tree.parent[u]
        if p == tree.sink or p not in tree.parent:
            continue
        if u not in earliest or p not in earliest:
            missing = u if u not in earliest else p
            report.ordering_violations.append(
                f"node {missing} has no designated transmit slot")
            continue
        if earliest[u] >= earliest[p]:
            report.ordering_violations.append(
                f"node {u} first transmits at absolute slot {earliest[u]}, "
                f"not before its parent {p} at {earliest[p]}")
    return report


# --- export format --------------------------------------------------------

def export_schedule(schedule: Schedule) -> str:
    """Line format: node <id> region <rid> window <w> anchor <i> slots <csv>."""
    lines = [f"# m {schedule.m} phi {schedule.phi}"]
    for rid in sorted(schedule.regions):
        rs = schedule.regions[rid]
        members = ",".join(str(u) for u in rs.members)
        lines.append(f"# region {rid} center {rs.center} color {rs.color} "
                     f"start {rs.window.start_period} "
                     f"stride {rs.window.superframe_stride} members {members}")
    for a in sorted(schedule.assignments, key=lambda a: (a.node, a.region_id)):
        csv = ",".join(str(s) for s in a.slots)
        lines.append(f"node {a.node} region {a.region_id} "
                     f"window {schedule.regions[a.region_id].window.window_index} "
                     f"anchor {a.anchor} slots {csv}")
    return "\n".join(lines) + "\n"


def parse_schedule(text: str) -> Schedule:
    m = phi = None
    region_meta: dict[int, dict] = {}
    assignments: list[NodeAssignment] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "#" and len(parts) >= 5 and parts[1] == "m":
                m, phi = int(parts[2]), int(parts[4])
            elif parts[0] == "#" and len(parts) >= 2 and parts[1] == "region":
                meta = {parts[i]: parts[i + 1] for i in range(3, len(parts) - 1, 2)}
                rid = int(parts[2])
                region_meta[rid] = {
                    "center": int(meta["center"]), "color": int(meta["color"]),
                    "start": int(meta["start"]), "stride": int(meta["stride"]),
                    "members": tuple(int(x) for x in meta["members"].split(","))}
            elif parts[0] == "node":
                fields = dict(zip(parts[0::2], parts[1::2]))
                slots = tuple(int(s) for s in fields["slots"].split(","))
                assignments.append(NodeAssignment(
                    node=int(fields["node"]), region_id=int(fields["region"]),
                    anchor=int(fields["anchor"]),
                    rows=0,  # recovered below once m is known
                    slots=slots))
        except (KeyError, ValueError, IndexError) as exc:
            raise ValueError(f"schedule line {line_no}: cannot parse {line!r}") from exc
    if m is None or phi is None:
        raise ValueError("schedule header with period and phi is missing")
    side = math.isqrt(m - 1) + 1
    fixed = []
    for a in assignments:
        # a block of b rows and columns covers 2*b*side - b*b slots
        n = len(a.slots)
        rows = next((b for b in range(1, side + 1)
                     if 2 * b * side - b * b == n), 0)
        fixed.append(NodeAssignment(a.node, a.region_id, a.anchor, rows, a.slots))
    regions = {}
    for rid, meta in region_meta.items():
        regions[rid] = RegionSchedule(
            region_id=rid, center=meta["center"], color=meta["color"],
            window=SlotWindow(region_id=rid,
                              window_index=meta["start"] % phi,
                              start_period=meta["start"],
                              superframe_stride=meta["stride"]),
            members=meta["members"])
    return Schedule(m=m, phi=phi, regions=regions, assignments=fixed)
