"""Tests for graph model, tree construction, regions and coloring."""

import pytest

from adc.topology import (DisconnectedTopologyError, InterferenceModel, Region,
                          Topology, TopologyParseError, build_tree,
                          color_regions, extract_regions, interference_constant,
                          region_hop_distance, region_relation)


def path(n):
    return Topology([(i, i + 1) for i in range(n - 1)], sink=0)


def test_tree_single_node():
    t = Topology([], sink=5, isolated_nodes=[5])
    tree = build_tree(t)
    assert tree.radius == 0
    assert tree.parent == {}
    assert tree.cds == frozenset({5})


def test_tree_path():
    tree = build_tree(path(3))
    assert tree.level == {0: 0, 1: 1, 2: 2}
    assert tree.radius == 2
    assert tree.parent == {1: 0, 2: 1}


def test_tree_star():
    t = Topology([(0, i) for i in range(1, 6)], sink=0)
    tree = build_tree(t)
    assert all(tree.level[i] == 1 for i in range(1, 6))
    assert tree.max_degree == 5
    assert tree.cds == frozenset({0})
    assert all(tree.parent[i] == 0 for i in range(1, 6))


def test_tree_rejects_disconnected():
    t = Topology([(0, 1)], sink=0, isolated_nodes=[7])
    with pytest.raises(DisconnectedTopologyError):
        build_tree(t)


def test_level_monotone_and_domination():
    t = Topology.random_geometric(60, 8.0, 1.5, seed=4)
    tree = build_tree(t)
    for u, p in tree.parent.items():
        assert tree.level[u] == tree.level[p] + 1
        assert p in tree.cds
        assert p in t.adj[u]
    # every node is in the set or adjacent to it
    for u in t.nodes:
        assert u in tree.cds or any(v in tree.cds for v in t.adj[u])
    # the set is connected: walk each member up to the sink
    for u in tree.cds:
        steps = 0
        while u != t.sink:
            u = tree.parent[u]
            assert u in tree.cds
            steps += 1
            assert steps <= tree.radius


def test_regions_cover_graph():
    t = Topology.random_geometric(60, 8.0, 1.5, seed=4)
    tree = build_tree(t)
    regions = extract_regions(tree, t)
    assert len(regions) == len(tree.cds)
    covered = set()
    for r in regions:
        assert r.center in tree.cds
        assert r.members == frozenset({r.center} | t.adj[r.center])
        covered |= r.members
    assert covered == set(t.nodes)
    # closed neighborhoods never exceed max degree + 1
    assert max(len(r.members) for r in regions) <= tree.max_degree + 1


def test_region_relations():
    #  0-1-2-3-4-5 chain; regions around 1 and 3 share node 2
    t = path(6)
    tree = build_tree(t)
    r1 = Region(0, 1, frozenset({0, 1, 2}))
    r3 = Region(1, 3, frozenset({2, 3, 4}))
    r5 = Region(2, 5, frozenset({4, 5}))
    far = Region(3, 5, frozenset({5}))
    assert region_relation(r1, r3, t) == "overlap"
    assert region_relation(r3, r5, t) == "overlap"
    assert region_relation(r1, far, t) == "disjoint"
    assert region_hop_distance(r1, r3, t) == 0
    assert region_hop_distance(r1, far, t) == 3
    disjoint_adjacent = Region(4, 3, frozenset({3, 4}))
    assert region_relation(r1, disjoint_adjacent, t) == "neighboring"


def test_coloring_chain():
    t = path(8)
    tree = build_tree(t)
    regions = extract_regions(tree, t)
    model = InterferenceModel(kind="rts_cts", phi=1)
    colored, chi = color_regions(regions, t, model)
    # neighbors within one hop never share a color
    for i, ra in enumerate(colored):
        for rb in colored[i + 1:]:
            if region_hop_distance(ra, rb, t) <= 1:
                assert ra.color != rb.color
    assert chi >= 2


def test_coloring_single_region():
    t = Topology([(0, 1)], sink=0)
    tree = build_tree(t)
    colored, chi = color_regions(extract_regions(tree, t), t,
                                 InterferenceModel.rts_cts())
    assert chi == len(colored) or chi >= 1


def test_coloring_palette_cap():
    t = path(6)
    tree = build_tree(t)
    regions = extract_regions(tree, t)
    with pytest.raises(ValueError):
        color_regions(regions, t, InterferenceModel.rts_cts(), max_colors=1)


def test_coloring_deterministic():
    t = Topology.random_geometric(50, 8.0, 1.6, seed=9)
    tree = build_tree(t)
    model = InterferenceModel.rts_cts()
    a, chi_a = color_regions(extract_regions(tree, t), t, model)
    b, chi_b = color_regions(extract_regions(build_tree(t), t), t, model)
    assert chi_a == chi_b
    assert [(r.id, r.color) for r in a] == [(r.id, r.color) for r in b]


def test_interference_constant_examples():
    model = InterferenceModel.rts_cts()
    lone = Topology([(0, 1)], sink=0)
    assert interference_constant(lone, model) == 2
    tri = Topology([(0, 1), (1, 2), (0, 2)], sink=0)
    assert interference_constant(tri, model) == 3
    single = Topology([], sink=0, isolated_nodes=[0])
    assert interference_constant(single, model) == 1


def test_interference_model_validation():
    with pytest.raises(ValueError):
        InterferenceModel(kind="rts_cts", phi=0)
    with pytest.raises(ValueError):
        InterferenceModel(kind="mystery", phi=2)
    t = Topology([(0, 1)], sink=0, comm_range=1.0, interference_range=2.5)
    assert InterferenceModel.protocol(t).phi == 4


def test_edge_list_round_trip():
    t = Topology([(0, 1), (1, 2), (0, 2)], sink=1)
    text = t.to_edge_list()
    back = Topology.from_edge_list(text)
    assert back.sink == 1
    assert back.edges() == t.edges()


def test_edge_list_parse_errors():
    with pytest.raises(TopologyParseError) as exc:
        Topology.from_edge_list("# sink 0\n0 1\nbogus line here\n")
    assert exc.value.line_no == 3
    with pytest.raises(TopologyParseError):
        Topology.from_edge_list("# sink 0\n0 x\n")
    with pytest.raises(TopologyParseError):
        Topology.from_edge_list("")


def test_edge_list_default_sink():
    t = Topology.from_edge_list("3 7\n7 5\n")
    assert t.sink == 3


def test_random_geometric_deterministic():
    a = Topology.random_geometric(40, 8.0, 1.8, seed=12)
    b = Topology.random_geometric(40, 8.0, 1.8, seed=12)
    assert a.edges() == b.edges()
    assert a.sink == b.sink
    assert a.is_connected()
    assert len(a.nodes) == 40


def test_random_geometric_impossible():
    with pytest.raises(DisconnectedTopologyError):
        Topology.random_geometric(30, 100.0, 0.5, seed=1, max_attempts=5)


def test_topology_rejects_self_loop_and_bad_sink():
    with pytest.raises(ValueError):
        Topology([(1, 1)], sink=1)
    with pytest.raises(ValueError):
        Topology([(0, 1)], sink=9)
