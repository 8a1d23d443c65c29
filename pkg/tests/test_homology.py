import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holeperc.config import Configuration, SimulationParams, sample_configuration
from holeperc.errors import OracleScaleExceeded
from holeperc.holes import extract_holes
from holeperc.homology import (
    betti_codim1,
    boundary_rank,
    chain_complex_slice,
    complement_components_voxel,
    gf2_rank_columns,
)
from holeperc.lattice import DualVertex, Window

from .oracles import cell_faces, gf2_rank_dense


def test_trivial_values():
    w = Window(2, 2)
    assert betti_codim1(Configuration.all_closed(w)) == 0
    assert complement_components_voxel(Configuration.all_closed(w)) == 0
    square = Configuration.from_faces(w, cell_faces(DualVertex((0, 0))))
    assert betti_codim1(square) == 1
    assert complement_components_voxel(square) == 1


def test_unit_cube_boundary():
    cfg = Configuration.from_faces(Window(1, 3), cell_faces(DualVertex((0, 0, 0))))
    cx = chain_complex_slice(cfg)
    assert cx.shape == (12, 6)  # 12 edges, 6 squares
    assert betti_codim1(cfg) == 1
    assert complement_components_voxel(cfg) == 1


def test_all_open_window():
    for d, n in [(2, 2), (3, 1)]:
        w = Window(n, d)
        cfg = Configuration.all_open(w)
        assert betti_codim1(cfg) == complement_components_voxel(cfg) == w.n_vertices


@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_packed_rank_matches_dense_elimination(rows, cols, seed):
    m = np.random.default_rng(seed).random((rows, cols)) < 0.4
    columns = [np.flatnonzero(m[:, c]).tolist() for c in range(cols)]
    assert gf2_rank_columns(rows, columns) == gf2_rank_dense(m)


def test_rank_over_word_boundary():
    rng = np.random.default_rng(0)
    m = rng.random((150, 90)) < 0.1
    columns = [np.flatnonzero(m[:, c]).tolist() for c in range(90)]
    assert gf2_rank_columns(150, columns) == gf2_rank_dense(m)


@pytest.mark.parametrize("seed", range(5))
def test_column_order_does_not_change_rank(seed):
    cfg = sample_configuration(SimulationParams(0.5, 3, 2, 1, seed), 0)
    cx = chain_complex_slice(cfg)
    base = boundary_rank(cx)
    assert base == gf2_rank_dense(cx.boundary_matrix())
    order = np.random.default_rng(seed).permutation(cx.shape[1])
    assert boundary_rank(cx, order) == base


@given(st.sampled_from([(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3)]),
       st.sampled_from([0.1, 0.3, 0.5, 0.7, 0.9]), st.integers(0, 100_000))
@settings(max_examples=80, deadline=None)
def test_three_way_agreement(dn, p, seed):
    d, n = dn
    cfg = sample_configuration(SimulationParams(p, d, n, 1, seed), 0)
    h = len(extract_holes(cfg))
    assert betti_codim1(cfg) == h
    assert complement_components_voxel(cfg) == h


def test_scale_guards():
    cfg = Configuration.all_open(Window(6, 3))  # 5616 open faces
    with pytest.raises(OracleScaleExceeded):
        betti_codim1(cfg)
    with pytest.raises(OracleScaleExceeded):
        complement_components_voxel(Configuration.all_closed(Window(10, 2)))
    assert isinstance(OracleScaleExceeded("x"), ValueError)
