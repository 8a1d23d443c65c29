import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holeperc.config import Configuration, SimulationParams, sample_configuration
from holeperc.holes import (
    build_hole_graph,
    count_spanning_hole_clusters,
    extract_holes,
    hole_clusters_via_complement,
    hole_edges_via_faces,
    hole_graph_adjacency_text,
    hole_graph_summary,
    is_trifurcation,
    trifurcations,
    write_hole_graph,
)
from holeperc.lattice import DualVertex, Window, dual_vertices_in_window, vertex_at, vertex_index

from .oracles import bfs_hole_clusters, bfs_holes, cell_faces


def _random_cfg(d, n, p, seed):
    return sample_configuration(SimulationParams(p, d, n, 1, seed), 0)


def test_unit_square_is_one_hole():
    w = Window(2, 2)
    cfg = Configuration.from_faces(w, cell_faces(DualVertex((0, 0))))
    holes = extract_holes(cfg)
    assert len(holes) == 1
    assert holes[0].members == {DualVertex((0, 0))} and holes[0].size == 1
    g = build_hole_graph(cfg)
    assert g.n_holes == 1 and g.n_clusters == 1 and len(g.edges) == 0


def test_unit_cube_in_three_dimensions():
    cfg = Configuration.from_faces(Window(2, 3), cell_faces(DualVertex((0, 0, 0))))
    assert len(extract_holes(cfg)) == 1


@pytest.mark.parametrize("d,n", [(2, 2), (3, 2)])
def test_all_open_gives_singleton_grid(d, n):
    w = Window(n, d)
    g = build_hole_graph(Configuration.all_open(w))
    assert g.n_holes == w.n_vertices
    assert np.all(g.index.sizes == 1)
    assert g.n_clusters == 1
    # one edge per adjacent pair of dual vertices inside the window
    assert len(g.edges) == d * (2 * n - 1) * (2 * n) ** (d - 1)


def test_all_closed_has_no_holes():
    assert extract_holes(Configuration.all_closed(Window(3, 3))) == []


@pytest.mark.parametrize("d,n", [(2, 2), (2, 3), (3, 2)])
@pytest.mark.parametrize("p", [0.3, 0.6, 0.9])
def test_holes_and_clusters_match_bfs(d, n, p):
    for seed in range(5):
        cfg = _random_cfg(d, n, p, seed)
        assert {h.members for h in extract_holes(cfg)} == bfs_holes(cfg)
        g = build_hole_graph(cfg)
        w = cfg.window
        part = g.vertex_partition()
        got = {
            frozenset(vertex_at(w, int(v)) for v in np.flatnonzero(part == c))
            for c in np.unique(part[part >= 0])
        }
        assert got == bfs_hole_clusters(cfg)


@given(st.sampled_from([(2, 3), (2, 5), (3, 2), (3, 3)]), st.sampled_from([0.1, 0.3, 0.5, 0.7, 0.9]),
       st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_partition_equals_complement_components(dn, p, seed):
    cfg = _random_cfg(*dn, p, seed)
    assert np.array_equal(build_hole_graph(cfg).vertex_partition(), hole_clusters_via_complement(cfg))


@given(st.sampled_from([(2, 2), (2, 3), (3, 2)]), st.floats(0.05, 0.95), st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_edges_equal_shared_boundary_faces(dn, p, seed):
    cfg = _random_cfg(*dn, p, seed)
    assert build_hole_graph(cfg).edge_set() == hole_edges_via_faces(cfg)


def _star(w: Window, arms):
    """Singleton holes at the origin and along the given unit directions."""
    d = w.d
    cells = {(0,) * d}
    for axis, sign in arms:
        for k in range(1, w.n + 1):
            c = [0] * d
            c[axis] = sign * k
            if -w.n <= c[axis] < w.n:
                cells.add(tuple(c))
    faces = {q for c in cells for q in cell_faces(DualVertex(c))}
    return Configuration.from_faces(w, faces)


def test_trifurcation_three_arms():
    w = Window(3, 3)
    cfg = _star(w, [(0, 1), (1, 1), (2, 1)])
    o = DualVertex((0, 0, 0))
    assert is_trifurcation(cfg, o)
    assert trifurcations(cfg).tolist() == [vertex_index(w, o)]


@pytest.mark.parametrize("arms", [
    [(0, 1), (1, 1)],
    [(0, 1), (1, 1), (2, 1), (0, -1)],
])
def test_not_trifurcation_with_two_or_four_arms(arms):
    w = Window(3, 3)
    cfg = _star(w, arms)
    assert not is_trifurcation(cfg, DualVertex((0, 0, 0)))
    assert len(trifurcations(cfg)) == 0


def test_no_trifurcation_in_full_grid():
    cfg = Configuration.all_open(Window(4, 2))
    assert len(trifurcations(cfg)) == 0


@given(st.sampled_from([(2, 3), (2, 4), (3, 2), (3, 3)]), st.floats(0.4, 0.95), st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_trifurcation_scan_matches_direct_check(dn, p, seed):
    cfg = _random_cfg(*dn, p, seed)
    w = cfg.window
    direct = [vertex_index(w, x) for x in dual_vertices_in_window(w) if is_trifurcation(cfg, x)]
    found = trifurcations(cfg).tolist()
    assert found == direct
    assert len(found) <= w.n_boundary_vertices


def test_scan_finds_trifurcations_on_random_samples():
    # guard against the scan trivially returning nothing
    hits = sum(len(trifurcations(_random_cfg(2, 6, 0.7, s))) for s in range(60))
    assert hits > 0


def test_spanning_counts():
    assert count_spanning_hole_clusters(Configuration.all_open(Window(4, 2))) == 1
    assert count_spanning_hole_clusters(Configuration.all_closed(Window(4, 3))) == 0


def test_export_formats(tmp_path):
    w = Window(2, 2)
    faces = set(cell_faces(DualVertex((0, 0)))) | set(cell_faces(DualVertex((1, 0))))
    cfg = Configuration.from_faces(w, faces)
    g = build_hole_graph(cfg)
    assert hole_graph_adjacency_text(g) == "0 1 1: 1\n1 1 1: 0\n"
    s = hole_graph_summary(g)
    assert s["hole_count"] == 2 and s["edge_count"] == 1 and s["cluster_count"] == 1
    assert s["clusters"][0]["touches_boundary"] is True
    write_hole_graph(g, tmp_path / "adj.txt", tmp_path / "sum.json")
    assert json.loads((tmp_path / "sum.json").read_text()) == s
