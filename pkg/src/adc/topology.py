"""Network graphs, sink-rooted aggregation trees, regions and coloring.

The aggregation tree is built by breadth-first layering from the sink.
A connected dominating set is carved out of the layers; the closed
one-hop neighborhood of each dominating node forms a region, and
regions that could interfere receive distinct colors.  Colors later map
to period windows inside a superframe.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, replace
from random import Random


class DisconnectedTopologyError(ValueError):
    """The graph does not reach every node from the sink."""


class TopologyParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class Topology:
    """Undirected communication graph with a designated sink.

    Positions are optional; when present they drive distance-based
    interference checks, otherwise interference falls back to graph
    adjacency.
    """

    def __init__(self, edges, sink: int,
                 positions: dict[int, tuple[float, float]] | None = None,
                 comm_range: float = 1.0,
                 interference_range: float | None = None,
                 isolated_nodes=()):
        adj: dict[int, set[int]] = {}
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
        for u in isolated_nodes:
            adj.setdefault(u, set())
        if positions:
            for u in positions:
                adj.setdefault(u, set())
        if sink not in adj:
            raise ValueError(f"sink {sink} is not a node of the graph")
        self.adj = {u: frozenset(ns) for u, ns in adj.items()}
        self.nodes = sorted(self.adj)
        self.sink = sink
        self.positions = dict(positions) if positions else None
        self.comm_range = comm_range
        self.interference_range = (comm_range if interference_range is None
                                   else interference_range)

    def __repr__(self):
        return (f"Topology(n={len(self.nodes)}, edges={self.edge_count()}, "
                f"sink={self.sink})")

    def neighbors(self, u: int) -> list[int]:
        return sorted(self.adj[u])

    def degree(self, u: int) -> int:
        return len(self.adj[u])

    def max_degree(self) -> int:
        return max((len(ns) for ns in self.adj.values()), default=0)

    def edge_count(self) -> int:
        return sum(len(ns) for ns in self.adj.values()) // 2

    def edges(self) -> list[tuple[int, int]]:
        return sorted((u, v) for u in self.adj for v in self.adj[u] if u < v)

    def distance(self, u: int, v: int) -> float:
        if self.positions is None:
            raise ValueError("topology has no coordinates")
        (xa, ya), (xb, yb) = self.positions[u], self.positions[v]
        return math.hypot(xa - xb, ya - yb)

    def within_interference(self, u: int, v: int) -> bool:
        """Whether a transmission by u can disturb reception at v."""
        if u == v:
            return True
        if self.positions is not None:
            return self.distance(u, v) <= self.interference_range
        return v in self.adj[u]

    def bfs_levels(self, source: int) -> dict[int, int]:
        level = {source: 0}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v in sorted(self.adj[u]):
                if v not in level:
                    level[v] = level[u] + 1
                    queue.append(v)
        return level

    def is_connected(self) -> bool:
        return len(self.bfs_levels(self.sink)) == len(self.nodes)

    def hop_distance_sets(self, sources: set[int], targets: set[int]) -> int:
        """Fewest hops from any source to any target; 0 if they intersect."""
        if sources & targets:
            return 0
        seen = set(sources)
        queue = deque((u, 0) for u in sorted(sources))
        while queue:
            u, d = queue.popleft()
            for v in sorted(self.adj[u]):
                if v in seen:
                    continue
                if v in targets:
                    return d + 1
                seen.add(v)
                queue.append((v, d + 1))
        return len(self.nodes) + 1  # unreachable

    # --- construction helpers --------------------------------------------

    @classmethod
    def from_edge_list(cls, text: str, comm_range: float = 1.0,
                       interference_range: float | None = None) -> "Topology":
        """Parse `u v` pairs, one per line, with a `# sink <id>` header."""
        sink = None
        edges = []
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "sink":
                    try:
                        sink = int(parts[1])
                    except ValueError:
                        raise TopologyParseError(line_no, f"bad sink id {parts[1]!r}")
                continue
            parts = line.split()
            if len(parts) != 2:
                raise TopologyParseError(line_no, f"expected 'u v', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise TopologyParseError(line_no, f"non-integer endpoint in {line!r}")
            edges.append((u, v))
        if not edges:
            raise TopologyParseError(0, "no edges found")
        if sink is None:
            sink = min(min(u, v) for u, v in edges)
        return cls(edges, sink, comm_range=comm_range,
                   interference_range=interference_range)

    def to_edge_list(self) -> str:
        lines = [f"# sink {self.sink}"]
        lines += [f"{u} {v}" for u, v in self.edges()]
        return "\n".join(lines) + "\n"

    @classmethod
    def random_geometric(cls, n: int, area: float, radius: float, seed: int,
                         interference_range: float | None = None,
                         max_attempts: int = 200) -> "Topology":
        """Uniform points in an area x area square, edges within radius.

        Re-draws the whole layout from the same seeded stream until the
        graph comes out connected, so one seed always yields one graph.
        """
        if n < 1:
            raise ValueError("need at least one node")
        rng = Random(seed)
        for _ in range(max_attempts):
            pos = {i: (rng.uniform(0, area), rng.uniform(0, area)) for i in range(n)}
            edges = [(i, j) for i in range(n) for j in range(i + 1, n)
                     if math.hypot(pos[i][0] - pos[j][0],
                                   pos[i][1] - pos[j][1]) <= radius]
            centre = (area / 2, area / 2)
            sink = min(range(n), key=lambda i: (math.hypot(pos[i][0] - centre[0],
                                                           pos[i][1] - centre[1]), i))
            if n == 1:
                return cls([], sink, positions=pos, comm_range=radius,
                           interference_range=interference_range,
                           isolated_nodes=range(n))
            topo = cls(edges, sink, positions=pos, comm_range=radius,
                       interference_range=interference_range)
            if len(topo.nodes) == n and topo.is_connected():
                return topo
        raise DisconnectedTopologyError(
            f"no connected layout for n={n}, area={area}, radius={radius} "
            f"after {max_attempts} draws")


@dataclass(frozen=True)
class InterferenceModel:
    """Interference assumption: which regions must not share a window.

    phi is the hop radius within which two regions need distinct colors.
    """

    kind: str = "rts_cts"
    phi: int = 2

    def __post_init__(self):
        if self.phi < 1:
            raise ValueError("phi must be at least 1")
        if self.kind not in ("rts_cts", "protocol", "conflict_graph"):
            raise ValueError(f"unknown interference kind {self.kind!r}")

    @classmethod
    def rts_cts(cls) -> "InterferenceModel":
        return cls("rts_cts", 2)

    @classmethod
    def protocol(cls, topology: Topology) -> "InterferenceModel":
        ratio = topology.interference_range / topology.comm_range
        return cls("protocol", math.ceil(ratio) + 1)


@dataclass(frozen=True)
class AggregationTree:
    """Sink-rooted BFS tree with its connected dominating set."""

    sink: int
    parent: dict[int, int]
    level: dict[int, int]
    cds: frozenset[int]
    radius: int
    max_degree: int

    def children(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {u: [] for u in self.level}
        for u, p in sorted(self.parent.items()):
            out[p].append(u)
        return out

    def depth_sorted_nodes(self) -> list[int]:
        return sorted(self.level, key=lambda u: (self.level[u], u))


def build_tree(topology: Topology) -> AggregationTree:
    """Layer the graph from the sink and pick dominators plus connectors.

    Dominators are a greedy maximal independent set taken in
    (level, id) order.  A second pass promotes, per node that lacks one,
    the smallest-id upper-level neighbor into the set, so every node has
    a dominating-set parent one level up and the set is connected.
    """
    level = topology.bfs_levels(topology.sink)
    if len(level) != len(topology.nodes):
        missing = sorted(set(topology.nodes) - set(level))
        raise DisconnectedTopologyError(
            f"nodes unreachable from sink {topology.sink}: {missing[:10]}")
    order = sorted(level, key=lambda u: (level[u], u))
    cds: set[int] = set()
    for u in order:
        if not any(v in cds for v in topology.adj[u]):
            cds.add(u)
    max_level = max(level.values())
    for lv in range(1, max_level + 1):
        for u in (n for n in order if level[n] == lv):
            uppers = [v for v in topology.neighbors(u) if level[v] == lv - 1]
            if not any(v in cds for v in uppers):
                cds.add(uppers[0])
    parent = {}
    for u in order:
        if u == topology.sink:
            continue
        parent[u] = min(v for v in topology.adj[u]
                        if level[v] == level[u] - 1 and v in cds)
    return AggregationTree(sink=topology.sink, parent=parent, level=dict(level),
                           cds=frozenset(cds), radius=max_level,
                           max_degree=topology.max_degree())


@dataclass(frozen=True)
class Region:
    """Closed one-hop neighborhood of a dominating-set node."""

    id: int
    center: int
    members: frozenset[int]
    color: int | None = None


def extract_regions(tree: AggregationTree, topology: Topology) -> list[Region]:
    regions = []
    for rid, center in enumerate(sorted(tree.cds)):
        members = frozenset({center} | topology.adj[center])
        regions.append(Region(id=rid, center=center, members=members))
    return regions


def region_relation(r1: Region, r2: Region, topology: Topology) -> str:
    """'overlap', 'neighboring' (interference reach) or 'disjoint'."""
    if r1.members & r2.members:
        return "overlap"
    for u in sorted(r1.members):
        for v in sorted(r2.members):
            if topology.within_interference(u, v):
                return "neighboring"
    return "disjoint"


def region_hop_distance(r1: Region, r2: Region, topology: Topology) -> int:
    return topology.hop_distance_sets(set(r1.members), set(r2.members))


def regions_conflict(r1: Region, r2: Region, topology: Topology,
                     model: InterferenceModel) -> bool:
    """Regions that must not be awake in the same period window."""
    if region_relation(r1, r2, topology) != "disjoint":
        return True
    return region_hop_distance(r1, r2, topology) <= model.phi


def region_conflict_map(regions: list[Region], topology: Topology,
                        model: InterferenceModel) -> dict[int, set[int]]:
    """Conflict adjacency over region ids, one BFS per region."""
    ordered = sorted(regions, key=lambda r: r.id)
    # hop distance from each region to every node
    dist: dict[int, dict[int, int]] = {}
    for r in ordered:
        d = {u: 0 for u in r.members}
        queue = deque(sorted(r.members))
        while queue:
            u = queue.popleft()
            for v in sorted(topology.adj[u]):
                if v not in d:
                    d[v] = d[u] + 1
                    queue.append(v)
        dist[r.id] = d
    conflict: dict[int, set[int]] = {r.id: set() for r in ordered}
    for i, ra in enumerate(ordered):
        da = dist[ra.id]
        for rb in ordered[i + 1:]:
            hops = min((da.get(u, len(topology.nodes) + 1) for u in rb.members),
                       default=len(topology.nodes) + 1)
            near = hops <= model.phi
            if (not near and hops > 0 and topology.positions is not None
                    and topology.interference_range > topology.comm_range):
                # long interference reach can join regions that sit far
                # apart in hops; edges themselves never span past the
                # comm range, so this only matters when the ranges differ
                near = region_relation(ra, rb, topology) == "neighboring"
            if near or hops == 0:
                conflict[ra.id].add(rb.id)
                conflict[rb.id].add(ra.id)
    return conflict


def color_regions(regions: list[Region], topology: Topology,
                  model: InterferenceModel,
                  max_colors: int | None = None) -> tuple[list[Region], int]:
    """Greedy sequential coloring in region-id order.

    Returns the recolored regions and the palette size used.  A
    max_colors cap turns palette overflow into an error for callers
    that must fit a fixed superframe.
    """
    ordered = sorted(regions, key=lambda r: r.id)
    conflict = region_conflict_map(ordered, topology, model)
    colors: dict[int, int] = {}
    for r in ordered:
        taken = {colors[o] for o in conflict[r.id] if o in colors}
        c = 0
        while c in taken:
            c += 1
        if max_colors is not None and c >= max_colors:
            raise ValueError(
                f"region {r.id} needs color {c} but palette is {max_colors}")
        colors[r.id] = c
    recolored = [replace(r, color=colors[r.id]) for r in ordered]
    chi = max(colors.values()) + 1 if colors else 0
    return recolored, chi


def interference_constant(topology: Topology, model: InterferenceModel) -> int:
    """Colors needed so interfering closed neighborhoods never share a period.

    Greedy vertex coloring of the conflict graph whose vertices are the
    closed one-hop neighborhoods and whose edges join neighborhoods
    within interference reach of each other.
    """
    sets = {u: {u} | set(topology.adj[u]) for u in topology.nodes}
    colors: dict[int, int] = {}
    for u in topology.nodes:
        taken = set()
        for v in topology.nodes:
            if v == u or v not in colors:
                continue
            if any(topology.within_interference(a, b)
                   for a in sorted(sets[u]) for b in sorted(sets[v])):
                taken.add(colors[v])
        c = 0
        while c in taken:
            c += 1
        colors[u] = c
    return max(colors.values()) + 1 if colors else 1
