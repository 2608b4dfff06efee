"""Low-power-listening baseline: preamble sampling plus CSMA.

Modeled in continuous milliseconds under the slotted application layer:
packets generated during a slot become eligible at the next slot
boundary, which is what couples this MAC to the slot size.  Receivers
poll every check interval and the preamble is at least that long, so a
reception fails only when the receiver is itself transmitting or a
second transmission overlaps it within interference range.  There are
no link acknowledgements: a failed packet is gone.
"""

from __future__ import annotations

import heapq
from random import Random

from ..topology import AggregationTree, Topology
from .config import SimConfig
from .engine import generation_phases
from .report import SimReport


def _carrier(topo: Topology, a: int, b: int) -> bool:
    """Can a sense b's transmission (communication range)?"""
    if a == b:
        return True
    if topo.positions is not None:
        return topo.distance(a, b) <= topo.comm_range
    return b in topo.adj[a]


class _Lpl:
    def __init__(self, topology: Topology, tree: AggregationTree,
                 cfg: SimConfig, duration_slots: int):
        self.topo = topology
        self.tree = tree
        self.L = cfg.slot_ms
        self.duration_ms = duration_slots * self.L
        self.duration_slots = duration_slots
        self.gen = cfg.traffic.generation_period_ms
        self.preamble = cfg.mac.preamble_ms
        self.airtime = cfg.radio.unit_airtime_ms * cfg.traffic.payload
        self.backoff = cfg.mac.backoff_window_ms
        self.cca = cfg.mac.cca_ms
        # mote-class MAC buffers hold a handful of frames
        self.cap = cfg.mac.queue_cap or 4
        self.seed = cfg.seed
        self.rng = Random(f"{cfg.seed}:lpl")
        self.heap: list[tuple[int, int, str, int]] = []
        self.seq = 0
        self.active: list[dict] = []     # ongoing transmissions
        self.history: list[dict] = []    # recently ended, for overlap checks
        self.tx_ms = {u: 0 for u in topology.nodes}
        self.counters = {"collisions": 0, "receiver_busy": 0,
                         "attempts": 0, "received": 0}

    def push(self, t: int, kind: str, node: int):
        self.seq += 1
        heapq.heappush(self.heap, (t, self.seq, kind, node))

    def jit(self) -> int:
        """Desync delay for attempts that a slot boundary triggers."""
        return self.rng.randint(1, self.backoff)

    def busy_until(self, node: int, t: int) -> int | None:
        """Latest end among transmissions this node can already sense.

        A transmission that started within the CCA window is invisible;
        that blind spot is where boundary-synchronized senders pile up.
        """
        latest = None
        for tx in self.active:
            if tx["end"] > t and tx["start"] <= t - self.cca \
                    and _carrier(self.topo, node, tx["sender"]):
                latest = tx["end"] if latest is None else max(latest, tx["end"])
        return latest

    def start_tx(self, u: int, t: int, payload) -> None:
        end = t + self.preamble + self.airtime
        self.active.append({"sender": u, "start": t, "end": end,
                            "payload": payload})
        self.tx_ms[u] += self.preamble + self.airtime
        self.counters["attempts"] += 1
        self.push(end, "end", u)

    def finish_tx(self, u: int, t: int) -> tuple[bool, object]:
        """Resolve the transmission ending now; returns (delivered, payload)."""
        me = None
        for tx in self.active:
            if tx["sender"] == u and tx["end"] == t:
                me = tx
                break
        assert me is not None
        self.active.remove(me)
        self.history.append(me)
        cutoff = t - 2 * (self.preamble + self.airtime)
        self.history = [h for h in self.history if h["end"] > cutoff]
        p = self.tree.parent[u]
        others = [tx for tx in self.active + self.history
                  if tx is not me
                  and tx["start"] < me["end"] and tx["end"] > me["start"]]
        if any(tx["sender"] == p for tx in others):
            self.counters["receiver_busy"] += 1
            return False, me["payload"]
        if any(self.topo.within_interference(tx["sender"], p)
               for tx in others):
            self.counters["collisions"] += 1
            return False, me["payload"]
        self.counters["received"] += 1
        return True, me["payload"]


def _next_boundary(t: int, L: int) -> int:
    return (t // L + 1) * L


def run_lpl(topology: Topology, tree: AggregationTree, cfg: SimConfig,
            duration_slots: int) -> SimReport:
    sim = _Lpl(topology, tree, cfg, duration_slots)
    if cfg.traffic.mode == "raw":
        res = _raw(sim)
    else:
        res = _aggregate(sim)
    duration_s = sim.duration_ms / 1000.0
    duty = {}
    for u in topology.nodes:
        duty[str(u)] = min(1.0, cfg.mac.poll_duty
                           + sim.tx_ms[u] / sim.duration_ms)
    gen = res["generated"]
    window = res.get("rate_window_ms")
    if window is not None:
        got, span_ms = window
        throughput = got / (span_ms / 1000.0) if span_ms else 0.0
    else:
        throughput = res["delivered"] / duration_s if duration_s else 0.0
    return SimReport(
        mac="lpl",
        mode="lpl",
        seed=cfg.seed,
        duration_slots=duration_slots,
        slot_ms=cfg.slot_ms,
        generated=gen,
        delivered=res["delivered"],
        lost=res["lost"],
        in_flight=res["in_flight"],
        throughput=throughput,
        prr=res["delivered"] / gen if gen else 1.0,
        aggregation_delay=res.get("delay"),
        aggregation_complete=res.get("complete", False),
        collision_count=sim.counters["collisions"],
        same_slot_conflicts=0,
        rendezvous_histogram={},
        active_slot_fraction=duty,
        connectivity_ok=True,
        engaged=[],
        link_prr=(sim.counters["received"] / sim.counters["attempts"]
                  if sim.counters["attempts"] else None),
        config=cfg.to_dict(),
    )


# --- raw forwarding -------------------------------------------------------

def _raw(sim: _Lpl) -> dict:
    tree = sim.tree
    sink = tree.sink
    sources = [u for u in tree.level if u != sink]
    L, g = sim.L, sim.gen
    phase = generation_phases(sources, g, sim.seed)

    def eligible(u: int, now: int) -> int:
        # own packets generated in slots that closed before `now`
        return max(0, ((now // L) * L - phase[u] + g - 1) // g)

    own_q = {u: 0 for u in sources}
    seen = {u: 0 for u in sources}
    relay_q: dict[int, list[int]] = {u: [] for u in sources}  # elig times
    dropped = {u: 0 for u in sources}
    lost_tx = 0
    delivered = 0
    # first third of the run is pipeline warm-up; the steady-state rate
    # is measured on the rest
    warmup_ms = (sim.duration_slots // 3) * L
    delivered_measured = 0
    scheduled = {u: False for u in sources}

    def qlen(u):
        return own_q[u] + len(relay_q[u])

    def sync_arrivals(u, now):
        new = eligible(u, now) - seen[u]
        seen[u] += new
        admit = min(new, sim.cap - qlen(u))
        own_q[u] += admit
        dropped[u] += new - admit

    def sendable(u, now):
        if own_q[u] > 0:
            return True
        return bool(relay_q[u]) and relay_q[u][0] <= now

    def next_wake(u, now):
        j = seen[u]
        cand = [((phase[u] + j * g) // L + 1) * L]
        if relay_q[u]:
            cand.append(relay_q[u][0])
        t = min(cand)
        return t if t < sim.duration_ms else None

    def schedule_attempt(u, t):
        if not scheduled[u] and t < sim.duration_ms:
            scheduled[u] = True
            sim.push(t, "attempt", u)

    for u in sorted(sources):
        schedule_attempt(u, _next_boundary(0, L) + sim.jit())

    while sim.heap:
        t, _, kind, u = heapq.heappop(sim.heap)
        if kind == "attempt":
            scheduled[u] = False
            if t >= sim.duration_ms:
                continue
            sync_arrivals(u, t)
            if not sendable(u, t):
                w = next_wake(u, t)
                if w is not None:
                    schedule_attempt(u, w + sim.jit())
                continue
            busy = sim.busy_until(u, t)
            if busy is not None:
                schedule_attempt(u, busy + sim.rng.randint(1, sim.backoff))
                continue
            if relay_q[u] and relay_q[u][0] <= t:
                relay_q[u].pop(0)
            else:
                own_q[u] -= 1
            sim.start_tx(u, t, payload=1)
        else:  # end
            ok, _ = sim.finish_tx(u, t)
            p = tree.parent[u]
            if ok:
                if p == sink:
                    delivered += 1
                    if t >= warmup_ms:
                        delivered_measured += 1
                else:
                    if qlen(p) < sim.cap:
                        relay_q[p].append(_next_boundary(t, L))
                        schedule_attempt(p, _next_boundary(t, L) + sim.jit())
                    else:
                        dropped[p] += 1
            else:
                lost_tx += 1
            schedule_attempt(u, t + 1 + sim.rng.randint(1, sim.backoff))

    generated = sum(
        max(0, (sim.duration_ms - phase[u] + g - 1) // g) for u in sources)
    not_eligible = generated - sum(seen.values())
    in_flight = sum(qlen(u) for u in sources) + not_eligible
    lost = sum(dropped.values()) + lost_tx
    return {"generated": generated, "delivered": delivered,
            "lost": lost, "in_flight": in_flight,
            "rate_window_ms": (delivered_measured,
                               sim.duration_ms - warmup_ms)}


# --- one aggregation wave -------------------------------------------------

def _aggregate(sim: _Lpl) -> dict:
    tree = sim.tree
    sink = tree.sink
    children = tree.children()
    n_samples = len(tree.level) - 1
    if n_samples == 0:
        return {"generated": 0, "delivered": 0, "lost": 0, "in_flight": 0,
                "delay": 0, "complete": True}

    unresolved = {p: len(kids) for p, kids in children.items()}
    collected: dict[int, set[int]] = {u: set() for u in tree.level}
    state = {u: "waiting" for u in tree.level}   # waiting | queued | done
    scheduled = {u: False for u in tree.level}

    def schedule_attempt(u, t):
        if not scheduled[u] and t < sim.duration_ms:
            scheduled[u] = True
            sim.push(t, "attempt", u)

    for u in sorted(tree.level):
        if u != sink and not children.get(u):
            state[u] = "queued"
            schedule_attempt(u, _next_boundary(0, sim.L) + sim.jit())

    complete_ms: int | None = None
    while sim.heap:
        t, _, kind, u = heapq.heappop(sim.heap)
        if kind == "attempt":
            scheduled[u] = False
            if state[u] != "queued" or t >= sim.duration_ms:
                continue
            busy = sim.busy_until(u, t)
            if busy is not None:
                schedule_attempt(u, busy + sim.rng.randint(1, sim.backoff))
                continue
            state[u] = "done"   # committed: no acknowledgement, no retry
            sim.start_tx(u, t, payload=frozenset(collected[u] | {u}))
        else:
            ok, payload = sim.finish_tx(u, t)
            p = tree.parent[u]
            if ok:
                collected[p].update(payload)
                if p == sink and complete_ms is None \
                        and len(collected[sink]) == n_samples:
                    complete_ms = t
            if p != sink:
                unresolved[p] -= 1
                if unresolved[p] == 0 and state[p] == "waiting":
                    state[p] = "queued"
                    schedule_attempt(p, _next_boundary(t, sim.L) + sim.jit())
        if complete_ms is not None:
            break

    delivered = len(collected[sink])
    in_flight = sum(len(collected[u] | {u}) for u in tree.level
                    if u != sink and state[u] != "done")
    lost = n_samples - delivered - in_flight
    return {"generated": n_samples, "delivered": delivered, "lost": lost,
            "in_flight": in_flight,
            "delay": (complete_ms // sim.L) if complete_ms is not None else None,
            "complete": complete_ms is not None}
