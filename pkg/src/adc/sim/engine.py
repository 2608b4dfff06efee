"""Slot-granular simulator for quorum wakeup schedules.

Time is a global integer slot counter t.  Each node carries a clock
shift delta; its local slot is t + delta, so two nodes rendezvous in
real slot t exactly when both local patterns are active there.  A
transmission succeeds when the receiver is awake, is not itself
transmitting, and no other transmitter sits within interference range.

Share repair: a node that cannot reach some region mate thins nothing
away but adds a sweep.  Its activity becomes periodic over k
superframes: the normal window quorum every superframe (the column)
plus one run of phi+1 consecutive fully awake periods per k
superframes (the row).  The row is longer than one superframe, so on
the k-superframe cycle it contains every residue class modulo the
superframe; any neighbor whose pattern repeats each superframe is
therefore met no matter the shift, which is the connectivity argument
the acceptance checks lean on.
"""

from __future__ import annotations

import heapq
from bisect import bisect_left
from dataclasses import dataclass
from random import Random

from ..scheduling import (DelayBound, Schedule, build_schedule, delay_bounds,
                          validate_schedule)
from ..topology import (AggregationTree, InterferenceModel, Region, Topology,
                        build_tree, region_conflict_map)
from .config import ConfigError, SimConfig, resolve_shifts, resolve_topology
from .report import SimReport

# --- wake patterns --------------------------------------------------------

def node_pattern(schedule: Schedule, node: int) -> frozenset[int]:
    """Local superframe slots in which the node is awake."""
    out = set()
    for a in schedule.node_assignments(node):
        base = schedule.regions[a.region_id].window.window_index * schedule.m
        out.update(base + s for s in a.slots)
    return frozenset(out)


def share_pattern(schedule: Schedule, node: int, k: int) -> frozenset[int]:
    """Engaged pattern over k superframes: column plus phi+1 period sweep."""
    S = schedule.phi * schedule.m
    base = node_pattern(schedule, node)
    out = set(range((schedule.phi + 1) * schedule.m))
    for j in range(k):
        out.update(j * S + s for s in base)
    return frozenset(out)


def transmit_slots(schedule: Schedule, tree: AggregationTree
                   ) -> dict[int, frozenset[int]]:
    """Local superframe slots each node may use toward its parent.

    Within a region every window slot has at most one owner among the
    center's children: the child whose designated rendezvous covers it,
    else the lowest-id child whose quorum covers it.  Same-frame
    siblings therefore never transmit together.
    """
    owned: dict[int, set[int]] = {u: set() for u in schedule.nodes()}
    children = tree.children()
    m = schedule.m
    for rs in schedule.regions.values():
        kids = children.get(rs.center, [])
        if not kids:
            continue
        base = rs.window.window_index * m
        desig: dict[int, set[int]] = {}
        quor: dict[int, set[int]] = {}
        count = {u: 0 for u in kids}
        for u in kids:
            _, slots = schedule.link_slots(u, rs.center)
            desig[u] = set(slots)
            quor[u] = set(schedule.assignment(u, rs.region_id).slots)
        for s in range(m):
            # designated claimants outrank plain quorum claimants; within
            # a rank the child owning fewest slots so far wins, so every
            # child ends up with some slot as long as its quorum is wider
            # than the sibling count
            claimants = sorted(u for u in kids if s in desig[u])
            if not claimants:
                claimants = sorted(u for u in kids if s in quor[u])
            if claimants:
                owner = min(claimants, key=lambda u: (count[u], u))
                count[owner] += 1
                owned[owner].add(base + s)
    return {u: frozenset(v) for u, v in owned.items()}


# --- share bookkeeping ----------------------------------------------------

@dataclass(frozen=True)
class ShareState:
    """Per-node repair state: stride k and the foreign ids heard so far."""

    stride: int = 1
    occupants: tuple[int, ...] = ()

    @property
    def engaged(self) -> bool:
        return self.stride > 1


def quorum_share(state: ShareState, detected: tuple[int, ...] | list[int]
                 ) -> ShareState:
    """One detection round: any foreign occupancy bumps the stride."""
    if not detected:
        return state
    merged = list(state.occupants)
    for d in detected:
        if d not in merged:
            merged.append(d)
    return ShareState(stride=state.stride + 1, occupants=tuple(merged))


def classify_quorum_shift(delta: int, m: int) -> str:
    return "between-periods" if delta % m == 0 else "within-qs"


# --- connectivity ---------------------------------------------------------

@dataclass(frozen=True)
class ConnectivityResult:
    ok: bool
    rendezvous: tuple[int, ...]   # real slots within one common frame
    frame: int
    per_superframe: float


def _real_wake(pattern: frozenset[int], period: int, shift: int,
               frame: int) -> frozenset[int]:
    """Real slots over [0, frame) where a shifted periodic pattern fires."""
    copies = frame // period
    return frozenset((s - shift) % period + j * period
                     for s in pattern for j in range(copies))


def physical_connectivity_check(u: int, v: int, schedule: Schedule,
                                tree: AggregationTree,
                                shifts: dict[int, int],
                                engaged: frozenset[int] = frozenset(),
                                k: int = 2,
                                owned: dict[int, frozenset[int]] | None = None
                                ) -> ConnectivityResult:
    """Can u reach v under the given clock shifts?

    For a tree link (v is u's parent) the rendezvous slots are the real
    slots where u holds a transmit opportunity toward v and v is
    listening; wake overlap alone is not enough there, because transmit
    rights in a slot belong to one child.  For any other pair the two
    wake patterns just have to meet, which is what discovery and
    schedule exchange need.  Evaluated over one common frame: the
    superframe, or k superframes when either side runs the share
    repair.
    """
    S = schedule.phi * schedule.m
    frame = k * S if (u in engaged or v in engaged) else S
    if v in engaged:
        wake_v = _real_wake(share_pattern(schedule, v, k), k * S,
                            shifts.get(v, 0), frame)
    else:
        wake_v = _real_wake(node_pattern(schedule, v), S,
                            shifts.get(v, 0), frame)
    if tree.parent.get(u) == v:
        if owned is None:
            owned = transmit_slots(schedule, tree)
        opp = _real_wake(owned.get(u, frozenset()), S, shifts.get(u, 0),
                         frame)
    else:
        opp = _real_wake(node_pattern(schedule, u), S, shifts.get(u, 0),
                         frame)
    if u in engaged:
        row = frozenset(range((schedule.phi + 1) * schedule.m))
        opp |= _real_wake(row, k * S, shifts.get(u, 0), frame)
    meet = tuple(sorted(opp & wake_v))
    return ConnectivityResult(ok=bool(meet), rendezvous=meet, frame=frame,
                              per_superframe=len(meet) / (frame // S))


def region_pairs(schedule: Schedule) -> list[tuple[int, int]]:
    """Node pairs that share at least one region."""
    pairs = set()
    for rs in schedule.regions.values():
        ms = sorted(rs.members)
        for i, a in enumerate(ms):
            for b in ms[i + 1:]:
                pairs.add((a, b))
    return sorted(pairs)


def auto_engaged(schedule: Schedule, tree: AggregationTree,
                 topology: Topology, shifts: dict[int, int],
                 k: int = 2) -> frozenset[int]:
    """Engage one node of every neighbor pair that cannot rendezvous.

    Tree links engage the child, other pairs the lower id.  Engaging a
    node only grows its wake and transmit sets, so one pass settles it:
    repaired pairs stay repaired, passing pairs cannot regress, and the
    engaged node's sweep is guaranteed to cross any superframe-periodic
    neighbor no matter the shift.
    """
    owned = transmit_slots(schedule, tree)
    out = set()
    for u, p in sorted(tree.parent.items()):
        r = physical_connectivity_check(u, p, schedule, tree, shifts,
                                        owned=owned)
        if not r.ok:
            out.add(u)
    for a in sorted(topology.nodes):
        for b in sorted(topology.adj[a]):
            if b <= a or tree.parent.get(a) == b or tree.parent.get(b) == a:
                continue
            r = physical_connectivity_check(a, b, schedule, tree, shifts,
                                            owned=owned)
            if not r.ok:
                out.add(a)
    return frozenset(out)


# --- the simulator --------------------------------------------------------

def _cyclic_next(residues: list[int], period: int, start: int) -> int | None:
    """Smallest t >= start with t % period in residues."""
    if not residues:
        return None
    base = (start // period) * period
    idx = bisect_left(residues, start - base)
    if idx == len(residues):
        return base + period + residues[0]
    return base + residues[idx]


class _Sim:
    def __init__(self, schedule: Schedule, topology: Topology,
                 tree: AggregationTree, shifts: dict[int, int],
                 drift: dict[int, int], engaged: frozenset[int], k: int):
        self.schedule = schedule
        self.topo = topology
        self.tree = tree
        self.shifts = shifts
        self.drift = {u: drift.get(u, 0) for u in topology.nodes}
        self.any_drift = any(self.drift.values())
        self.engaged = engaged
        self.k = k
        self.S = schedule.phi * schedule.m
        self.H = k * self.S if engaged else self.S
        self.row_len = (schedule.phi + 1) * schedule.m
        self.pattern = {u: node_pattern(schedule, u) for u in topology.nodes}
        self.share_pat = {u: share_pattern(schedule, u, k) for u in engaged}
        self.owned = transmit_slots(schedule, tree)
        # real residues of owned slots, valid while drift is zero
        self.owned_real = {
            u: sorted({(s - shifts.get(u, 0)) % self.S for s in self.owned[u]})
            for u in topology.nodes}
        self.wake_real = {}
        for u in topology.nodes:
            if u in engaged:
                res = sorted((s - shifts.get(u, 0)) % self.H
                             for s in self.share_pat[u])
                self.wake_real[u] = (res, self.H)
            else:
                res = sorted((s - shifts.get(u, 0)) % self.S
                             for s in self.pattern[u])
                self.wake_real[u] = (res, self.S)

    # -- predicates --

    def local(self, u: int, t: int) -> int:
        off = self.drift[u] * (t // self.S) if self.drift[u] else 0
        return t + self.shifts.get(u, 0) + off

    def awake(self, u: int, t: int) -> bool:
        lam = self.local(u, t)
        if u in self.engaged:
            return lam % self.H in self.share_pat[u]
        return lam % self.S in self.pattern[u]

    def row_awake(self, u: int, t: int) -> bool:
        return u in self.engaged and self.local(u, t) % self.H < self.row_len

    def column_opportunity(self, u: int, t: int) -> bool:
        return self.local(u, t) % self.S in self.owned[u]

    def is_opportunity(self, u: int, t: int) -> bool:
        if self.column_opportunity(u, t):
            return True
        if u in self.engaged:
            p = self.tree.parent.get(u)
            return (p is not None and self.row_awake(u, t)
                    and self.awake(p, t))
        return False

    def next_opportunity(self, u: int, start: int) -> int | None:
        if self.any_drift:
            for t in range(start, start + 2 * self.H + 2 * self.S):
                if self.is_opportunity(u, t):
                    return t
            return None
        col = _cyclic_next(self.owned_real[u], self.S, start)
        if u not in self.engaged:
            return col
        row = self._next_row_opportunity(u, start)
        if col is None:
            return row
        if row is None:
            return col
        return min(col, row)

    def _next_row_opportunity(self, u: int, start: int) -> int | None:
        p = self.tree.parent.get(u)
        if p is None:
            return None
        res, period = self.wake_real[p]
        if not res:
            return None
        base = (start // period) * period
        idx = bisect_left(res, start - base)
        limit = start + 2 * self.H + period
        while True:
            if idx == len(res):
                idx = 0
                base += period
            t = base + res[idx]
            idx += 1
            if t > limit:
                return None
            if self.row_awake(u, t):
                return t

    # -- shared interference step --

    def resolve(self, txs: list[tuple[int, int]], t: int,
                counters: dict) -> list[tuple[int, int]]:
        """Which (sender, receiver) pairs succeed in slot t.

        Contenders for the same receiver are arbitrated by the
        handshake, not lost: the receiver answers one of them, rotating
        by superframe so nobody starves, and the rest back off without
        corrupting the slot.  Transmissions toward different receivers
        cannot be arbitrated that way; any of them landing within
        interference range of another active receiver is a collision.
        """
        by_recv: dict[int, list[int]] = {}
        for u, p in txs:
            by_recv.setdefault(p, []).append(u)
        granted = []
        for p, us in sorted(by_recv.items()):
            us = sorted(set(us))
            win = us[(t // self.S) % len(us)]
            granted.append((win, p))
            counters["grant_deferred"] += len(us) - 1
        senders = {u for u, _ in granted}
        good = []
        for u, p in granted:
            if not self.awake(p, t):
                counters["receiver_asleep"] += 1
                continue
            if p in senders:
                counters["receiver_busy"] += 1
                continue
            if any(x != u and self.topo.within_interference(x, p)
                   for x in senders):
                counters["collisions"] += 1
                continue
            good.append((u, p))
        by_receiver = {}
        for u, p in good:
            assert p not in by_receiver, "two receptions at one node in a slot"
            by_receiver[p] = u
        return good


def _mode_of(tree: AggregationTree, shifts: dict[int, int], S: int,
             engaged: frozenset[int]) -> str:
    if engaged:
        return "share"
    for u, p in tree.parent.items():
        if (shifts.get(u, 0) - shifts.get(p, 0)) % S != 0:
            return "async"
    return "sync"


def _conflict_pairs(schedule: Schedule, topology: Topology,
                    model: InterferenceModel) -> set[frozenset[int]]:
    regions = [Region(id=rs.region_id, center=rs.center,
                      members=frozenset(rs.members), color=rs.color)
               for rs in schedule.regions.values()]
    cmap = region_conflict_map(regions, topology, model)
    return {frozenset((a, b)) for a in cmap for b in cmap[a] if a != b}


def _rendezvous_histogram(sim: _Sim) -> dict[str, int]:
    """Usable rendezvous per link within that link's repetition frame."""
    out = {}
    for u in sorted(sim.tree.parent):
        p = sim.tree.parent[u]
        r = physical_connectivity_check(u, p, sim.schedule, sim.tree,
                                        sim.shifts, sim.engaged, sim.k,
                                        owned=sim.owned)
        out[f"{u}->{p}"] = len(r.rendezvous)
    return out


def _duty(sim: _Sim) -> dict[str, float]:
    out = {}
    for u in sim.topo.nodes:
        if u in sim.engaged:
            out[str(u)] = len(sim.share_pat[u]) / sim.H
        else:
            out[str(u)] = len(sim.pattern[u]) / sim.S
    return out


def _connectivity_ok(sim: _Sim) -> bool:
    for u in sim.tree.parent:
        p = sim.tree.parent[u]
        r = physical_connectivity_check(u, p, sim.schedule, sim.tree,
                                        sim.shifts, sim.engaged, sim.k,
                                        owned=sim.owned)
        if not r.ok:
            return False
    return True


# --- aggregation traffic --------------------------------------------------

def _run_aggregate(sim: _Sim, bounds: DelayBound, mode: str,
                   duration: int | None,
                   conflicts: set[frozenset[int]]) -> dict:
    tree = sim.tree
    sink = tree.sink
    children = tree.children()
    subtree_size: dict[int, int] = {}
    for u in sorted(tree.level, key=lambda x: -tree.level[x]):
        subtree_size[u] = 1 + sum(subtree_size[c] for c in children.get(u, []))
    pending = {p: set(kids) for p, kids in children.items()}
    n_samples = len(tree.level) - 1
    if n_samples == 0:
        return {"generated": 0, "delivered": 0, "lost": 0, "in_flight": 0,
                "delay": 0, "complete": True, "slots_run": 1,
                "counters": {"collisions": 0, "receiver_asleep": 0,
                             "receiver_busy": 0, "same_slot_conflicts": 0,
                             "attempts": 0, "grant_deferred": 0}}

    if duration is not None:
        horizon = duration - 1
    else:
        pick = {"sync": bounds.sync_bound, "async": bounds.async_bound,
                "share": bounds.share_bound}[mode]
        horizon = pick + 2 * sim.H + 2 * sim.S

    counters = {"collisions": 0, "receiver_asleep": 0, "receiver_busy": 0,
                "same_slot_conflicts": 0, "attempts": 0, "grant_deferred": 0}
    center_region = {rs.center: rs.region_id
                     for rs in sim.schedule.regions.values()}

    ready = {u for u in tree.level
             if u != sink and not children.get(u)}
    done: set[int] = set()
    heap: list[tuple[int, int]] = []
    for u in sorted(ready):
        t0 = sim.next_opportunity(u, 0)
        if t0 is not None:
            heapq.heappush(heap, (t0, u))
    delivered_samples = 0
    complete_at: int | None = None

    while heap:
        t = heap[0][0]
        if t > horizon:
            break
        batch = []
        while heap and heap[0][0] == t:
            batch.append(heapq.heappop(heap)[1])
        col_tx, row_cand = [], []
        for u in sorted(set(batch)):
            if u in done or u not in ready:
                continue
            p = tree.parent[u]
            if sim.column_opportunity(u, t):
                col_tx.append((u, p))
            elif sim.row_awake(u, t) and sim.awake(p, t):
                row_cand.append((u, p))
            else:
                nxt = sim.next_opportunity(u, t + 1)
                if nxt is not None:
                    heapq.heappush(heap, (nxt, u))
        # receiver grant: one row transmitter per parent, and none when a
        # scheduled column transmission to the same parent claims the slot
        col_parents = {p for _, p in col_tx}
        granted: dict[int, int] = {}
        deferred = []
        for u, p in row_cand:
            if p in col_parents or (p in granted and granted[p] != u):
                deferred.append(u)
            else:
                granted[p] = u
        txs = col_tx + sorted((u, p) for p, u in granted.items())
        counters["attempts"] += len(txs)
        for u in deferred:
            nxt = sim.next_opportunity(u, t + 1)
            if nxt is not None:
                heapq.heappush(heap, (nxt, u))
        good = sim.resolve(txs, t, counters)
        good_centers = [p for _, p in good]
        for i, a in enumerate(good_centers):
            for b in good_centers[i + 1:]:
                ra, rb = center_region.get(a), center_region.get(b)
                if ra is not None and rb is not None \
                        and frozenset((ra, rb)) in conflicts:
                    counters["same_slot_conflicts"] += 1
        succeeded = {u for u, _ in good}
        for u, p in good:
            done.add(u)
            ready.discard(u)
            if p == sink:
                delivered_samples += subtree_size[u]
                pending[sink].discard(u)
                if not pending[sink]:
                    complete_at = t
            else:
                pending[p].discard(u)
                if not pending[p]:
                    ready.add(p)
                    nxt = sim.next_opportunity(p, t + 1)
                    if nxt is not None:
                        heapq.heappush(heap, (nxt, p))
        for u, p in txs:
            if u in succeeded:
                continue
            nxt = sim.next_opportunity(u, t + 1)
            if nxt is not None:
                heapq.heappush(heap, (nxt, u))
        if complete_at is not None:
            break

    slots_run = (complete_at if complete_at is not None else horizon) + 1
    return {
        "generated": n_samples,
        "delivered": delivered_samples,
        "lost": 0,
        "in_flight": n_samples - delivered_samples,
        "delay": complete_at,
        "complete": complete_at is not None,
        "slots_run": slots_run,
        "counters": counters,
    }


# --- raw forwarding traffic -----------------------------------------------

def generation_phases(nodes, gen_ms: int, seed: int) -> dict[int, int]:
    """Per-node offset of the packet clock within one generation period.

    Drawn independently per node so both MACs see the same arrival
    process for a given seed.
    """
    return {u: Random(f"{seed}:phase:{u}").randrange(gen_ms)
            for u in nodes}


def _run_raw(sim: _Sim, duration: int, slot_ms: int, gen_ms: int,
             capacity: int, queue_cap: int,
             conflicts: set[frozenset[int]], seed: int) -> dict:
    if sim.any_drift:
        raise ConfigError("raw traffic does not support clock drift")
    tree = sim.tree
    sink = tree.sink
    center_region = {rs.center: rs.region_id
                     for rs in sim.schedule.regions.values()}
    sources = [u for u in tree.level if u != sink]
    phase = generation_phases(sources, gen_ms, seed)

    # real-residue slot map for one superframe; identical every superframe
    slot_map: dict[int, list[tuple[int, int]]] = {}
    for u in sources:
        p = tree.parent[u]
        for r in sim.owned_real[u]:
            slot_map.setdefault(r, []).append((u, p))
    residues = sorted(slot_map)

    def eligible(u: int, t: int) -> int:
        # packets of u generated strictly before slot t opened
        return max(0, (t * slot_ms - phase[u] + gen_ms - 1) // gen_ms)

    queue = {u: 0 for u in sources}
    seen = {u: 0 for u in sources}
    dropped = {u: 0 for u in sources}
    delivered = 0
    # first third of the run is pipeline warm-up; the steady-state rate
    # is measured on the rest
    warmup = duration // 3
    delivered_measured = 0
    counters = {"collisions": 0, "receiver_asleep": 0, "receiver_busy": 0,
                "same_slot_conflicts": 0, "attempts": 0, "grant_deferred": 0,
                "packets_sent": 0, "packets_received": 0}

    superframes = -(-duration // sim.S)
    for sf in range(superframes):
        for r in residues:
            t = sf * sim.S + r
            if t >= duration:
                break
            txs = []
            for u, p in slot_map[r]:
                avail = eligible(u, t)
                new = avail - seen[u]
                seen[u] = avail
                admit = min(new, queue_cap - queue[u])
                queue[u] += admit
                dropped[u] += new - admit
                if queue[u] > 0:
                    txs.append((u, p))
            if not txs:
                continue
            counters["attempts"] += len(txs)
            for u, _ in txs:
                counters["packets_sent"] += min(capacity, queue[u])
            good = sim.resolve(txs, t, counters)
            good_centers = [p for _, p in good]
            for i, a in enumerate(good_centers):
                for b in good_centers[i + 1:]:
                    ra, rb = center_region.get(a), center_region.get(b)
                    if ra is not None and rb is not None \
                            and frozenset((ra, rb)) in conflicts:
                        counters["same_slot_conflicts"] += 1
            for u, p in good:
                moved = min(capacity, queue[u])
                queue[u] -= moved
                counters["packets_received"] += moved
                if p == sink:
                    delivered += moved
                    if t >= warmup:
                        delivered_measured += moved
                else:
                    room = queue_cap - queue[p]
                    queue[p] += min(moved, room)
                    dropped[p] += moved - min(moved, room)

    generated = sum(
        max(0, (duration * slot_ms - phase[u] + gen_ms - 1) // gen_ms)
        for u in sources)
    not_yet_eligible = generated - sum(seen.values())
    in_flight = sum(queue.values()) + not_yet_eligible
    lost = sum(dropped.values())
    sent = counters["packets_sent"]
    link_prr = counters["packets_received"] / sent if sent else None
    return {
        "generated": generated,
        "delivered": delivered,
        "lost": lost,
        "in_flight": in_flight,
        "delay": None,
        "complete": False,
        "slots_run": duration,
        "counters": counters,
        "link_prr": link_prr,
        "rate_window": (delivered_measured, duration - warmup),
    }


# --- entry points ---------------------------------------------------------

def run(schedule: Schedule, topology: Topology, *,
        shifts: dict[int, int] | None = None,
        drift: dict[int, int] | None = None,
        engaged: frozenset[int] = frozenset(),
        share_k: int = 2,
        traffic_mode: str = "aggregate",
        generation_period_ms: int = 1000,
        payload: int = 1,
        slot_ms: int = 1000,
        guard_ms: int = 8,
        wakeup_ms: int = 10,
        unit_airtime_ms: int = 1,
        queue_cap: int | None = None,
        duration_slots: int | None = None,
        model: InterferenceModel | None = None,
        tree: AggregationTree | None = None,
        seed: int = 0,
        config_echo: dict | None = None) -> SimReport:
    """Execute one deterministic run and fold the outcome into a report."""
    model = model or InterferenceModel.rts_cts()
    tree = tree or build_tree(topology)
    shifts = shifts or {u: 0 for u in topology.nodes}
    sim = _Sim(schedule, topology, tree, shifts, drift or {}, engaged, share_k)
    if duration_slots is not None and duration_slots < sim.S:
        raise ConfigError(
            f"duration {duration_slots} is under one superframe ({sim.S})")
    mode = _mode_of(tree, shifts, sim.S, engaged)
    bounds = delay_bounds(tree, schedule.phi, schedule.m)
    conflicts = _conflict_pairs(schedule, topology, model)

    if traffic_mode == "aggregate":
        res = _run_aggregate(sim, bounds, mode, duration_slots, conflicts)
    elif traffic_mode == "raw":
        if duration_slots is None:
            raise ConfigError("raw traffic needs an explicit duration")
        capacity = ((slot_ms - guard_ms - wakeup_ms)
                    // (unit_airtime_ms * payload))
        if capacity < 1:
            raise ConfigError(
                f"slot of {slot_ms} ms cannot carry one {payload}-unit packet")
        if queue_cap is None:
            # room for a full slot on top of a draining one, so buffering
            # never masks the per-slot channel capacity
            queue_cap = max(50, 2 * capacity)
        res = _run_raw(sim, duration_slots, slot_ms, generation_period_ms,
                       capacity, queue_cap, conflicts, seed)
    else:
        raise ConfigError(f"unknown traffic mode {traffic_mode!r}")

    gen = res["generated"]
    duration_s = res["slots_run"] * slot_ms / 1000.0
    window = res.get("rate_window")
    if window is not None:
        # steady-state rate: deliveries after warm-up over the window length
        got, span = window
        span_s = span * slot_ms / 1000.0
        throughput = got / span_s if span_s else 0.0
    else:
        throughput = res["delivered"] / duration_s if duration_s else 0.0
    return SimReport(
        mac="adc",
        mode=mode,
        seed=seed,
        duration_slots=res["slots_run"],
        slot_ms=slot_ms,
        generated=gen,
        delivered=res["delivered"],
        lost=res["lost"],
        in_flight=res["in_flight"],
        throughput=throughput,
        prr=res["delivered"] / gen if gen else 1.0,
        aggregation_delay=res["delay"],
        aggregation_complete=res["complete"],
        collision_count=res["counters"]["collisions"],
        same_slot_conflicts=res["counters"]["same_slot_conflicts"],
        rendezvous_histogram=_rendezvous_histogram(sim),
        active_slot_fraction=_duty(sim),
        connectivity_ok=_connectivity_ok(sim),
        engaged=sorted(engaged),
        link_prr=res.get("link_prr"),
        config=config_echo or {},
    )


def run_config(cfg: SimConfig) -> SimReport:
    """Config-driven pipeline: topology, schedule, shifts, run."""
    topology = resolve_topology(cfg)
    if cfg.interference.kind == "protocol":
        topology.interference_range = (cfg.interference.ratio
                                       * topology.comm_range)
        model = InterferenceModel.protocol(topology)
    else:
        model = InterferenceModel.rts_cts()
    tree = build_tree(topology)

    if cfg.mac.kind == "lpl":
        # the listening baseline ignores the quorum schedule entirely
        from .lpl import run_lpl
        if cfg.duration_slots is None and cfg.superframes is None:
            raise ConfigError("the listening baseline needs a duration")
        duration = cfg.duration_slots
        if duration is None:
            # superframe length without building a schedule: phi=2 default
            duration = cfg.superframes * 2 * (cfg.m or 100)
        return run_lpl(topology, tree, cfg, duration)

    schedule = build_schedule(topology, model=model, m=cfg.m,
                              selection=cfg.selection,
                              k_retries=cfg.k_retries, seed=cfg.seed)
    check = validate_schedule(schedule, topology, tree, model)
    if not check.ok:
        raise ConfigError("schedule failed validation: "
                          + "; ".join(check.violations[:3]))
    S = schedule.phi * schedule.m
    shifts = resolve_shifts(cfg, topology, S)
    if cfg.share.mode == "off":
        engaged: frozenset[int] = frozenset()
    elif cfg.share.mode == "fixed":
        engaged = frozenset(cfg.share.engaged)
    else:
        engaged = auto_engaged(schedule, tree, topology, shifts, cfg.share.k)
    duration = cfg.duration_slots
    if duration is None and cfg.superframes is not None:
        duration = cfg.superframes * S

    return run(schedule, topology,
               shifts=shifts, drift=cfg.clock.drift, engaged=engaged,
               share_k=cfg.share.k, traffic_mode=cfg.traffic.mode,
               generation_period_ms=cfg.traffic.generation_period_ms,
               payload=cfg.traffic.payload, slot_ms=cfg.slot_ms,
               guard_ms=cfg.radio.guard_ms,
               wakeup_ms=cfg.radio.wakeup_ms,
               unit_airtime_ms=cfg.radio.unit_airtime_ms,
               queue_cap=cfg.mac.queue_cap, duration_slots=duration,
               model=model, tree=tree, seed=cfg.seed,
               config_echo=cfg.to_dict())


def measure_aggregation_delay(report: SimReport) -> int | None:
    return report.aggregation_delay


def compare_to_bound(report: SimReport, bounds: DelayBound) -> bool:
    """Did the measured delay respect the bound for the report's clock mode?"""
    if not report.aggregation_complete or report.aggregation_delay is None:
        return False
    return report.aggregation_delay <= bounds.for_mode(report.mode)
