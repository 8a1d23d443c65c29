import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from holeperc.lattice import (
    DualBond,
    DualVertex,
    Face,
    Window,
    dual_bond_from_face,
    dual_vertices_in_window,
    face_adjacency_pairs,
    face_at,
    face_from_dual_bond,
    face_in_window,
    face_index,
    face_neighbor_table,
    face_neighbors,
    faces_in_window,
    faces_intersection_dim,
    is_boundary,
    spans,
    tables,
    vertex_at,
    vertex_index,
)


def test_bijection_example():
    # the bond from 0* along axis 1 crosses the face {1} x [0,1]
    e = DualBond(DualVertex((0, 0)), 1)
    q = face_from_dual_bond(e)
    assert q == Face(1, (1, 0))
    assert q.intervals() == ((1, 1), (0, 1))
    assert dual_bond_from_face(q) == e


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_bijection_round_trip_exhaustive(d, n):
    w = Window(n, d)
    faces = faces_in_window(w)
    assert len(faces) == w.n_faces == d * (2 * n + 1) * (2 * n) ** (d - 1)
    assert len(set(faces)) == len(faces)
    for k, q in enumerate(faces):
        assert face_from_dual_bond(dual_bond_from_face(q)) == q
        assert face_index(w, q) == k
        assert face_at(w, k) == q
    for x in dual_vertices_in_window(w):
        for j in range(1, d + 1):
            e = DualBond(x, j)
            assert dual_bond_from_face(face_from_dual_bond(e)) == e


def _faces_near(q: Face, r: int = 1):
    d = len(q.anchor)
    for axis in range(1, d + 1):
        for off in itertools.product(range(-r, r + 1), repeat=d):
            yield Face(axis, tuple(a + o for a, o in zip(q.anchor, off)))


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_face_neighbors_match_intersection_oracle(d):
    # every face of every orientation is a translate, so one anchor per axis suffices
    for axis in range(1, d + 1):
        q = Face(axis, (0,) * d)
        nb = face_neighbors(q)
        assert len(nb) == 6 * (d - 1)
        brute = {r for r in _faces_near(q) if r != q and faces_intersection_dim(q, r) == d - 2}
        assert nb == brute


@given(st.integers(2, 5).flatmap(
    lambda d: st.tuples(st.integers(1, d), st.lists(st.integers(-50, 50), min_size=d, max_size=d))
))
def test_face_neighbors_symmetric_and_sized(arg):
    axis, anchor = arg
    q = Face(axis, tuple(anchor))
    nb = face_neighbors(q)
    assert len(nb) == 6 * (len(anchor) - 1)
    for r in nb:
        assert q in face_neighbors(r)


def test_intersection_dim_examples():
    q = Face(1, (0, 0))
    assert faces_intersection_dim(q, q) == 1
    assert faces_intersection_dim(q, Face(2, (0, 0))) == 0
    assert faces_intersection_dim(q, Face(1, (2, 0))) == -1


@pytest.mark.parametrize("d,n", [(2, 1), (2, 3), (3, 2)])
def test_vertex_index_round_trip(d, n):
    w = Window(n, d)
    verts = dual_vertices_in_window(w)
    assert len(verts) == (2 * n) ** d
    for k, x in enumerate(verts):
        assert vertex_index(w, x) == k
        assert vertex_at(w, k) == x
    with pytest.raises(IndexError):
        vertex_index(w, DualVertex((n,) + (0,) * (d - 1)))


def test_face_membership_edges():
    w = Window(2, 2)
    assert face_in_window(w, Face(1, (2, 1)))
    assert not face_in_window(w, Face(1, (3, 0)))
    assert not face_in_window(w, Face(2, (2, 0)))  # segment [2,3] x {0}
    with pytest.raises(IndexError):
        face_index(w, Face(1, (3, 0)))


@pytest.mark.parametrize("d,n", [(2, 2), (3, 2), (2, 4)])
def test_boundary_count(d, n):
    w = Window(n, d)
    b = [x for x in dual_vertices_in_window(w) if is_boundary(w, x)]
    assert len(b) == w.n_boundary_vertices == (2 * n) ** d - (2 * n - 2) ** d


@pytest.mark.parametrize("d,n", [(2, 2), (3, 2)])
def test_tables_agree_with_tuple_api(d, n):
    w = Window(n, d)
    t = tables(w)
    V = w.n_vertices
    for k, q in enumerate(faces_in_window(w)):
        e = dual_bond_from_face(q)
        lo = vertex_index(w, e.base) if all(-n <= c < n for c in e.base.coords) else V
        hi = vertex_index(w, e.tip) if all(-n <= c < n for c in e.tip.coords) else V
        assert (t.bond_lo[k], t.bond_hi[k]) == (lo, hi)
        assert t.face_axis[k] + 1 == q.axis
        assert tuple(t.face_anchor[k]) == q.anchor
    nbt = face_neighbor_table(w)
    for k, q in enumerate(faces_in_window(w)):
        got = {face_at(w, int(u)) for u in nbt[k] if u >= 0}
        assert got == {r for r in face_neighbors(q) if face_in_window(w, r)}
    src, dst = face_adjacency_pairs(w)
    assert np.all(src < dst)
    assert len(src) == sum(int((nbt[k] >= 0).sum()) for k in range(w.n_faces)) // 2


def test_spans_bits():
    assert spans(0b11, 2)
    assert spans(0b1100, 2)
    assert not spans(0b0110, 2)
    assert not spans(0, 3)


def test_window_validation():
    with pytest.raises(ValueError):
        Window(2, 1)
    with pytest.raises(ValueError):
        Window(-1, 2)
