import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from holeperc.config import (
    Configuration,
    SimulationParams,
    configuration_from_bytes,
    configuration_to_bytes,
    coupled_field,
    load_snapshot,
    sample_configuration,
    save_snapshot,
    threshold,
    uniforms,
)
from holeperc.lattice import Face, Window


def test_params_validation():
    with pytest.raises(ValueError):
        SimulationParams(p=1.5, d=2, n=2)
    with pytest.raises(ValueError):
        SimulationParams(p=0.5, d=1, n=2)
    with pytest.raises(ValueError):
        SimulationParams(p=0.5, d=2, n=2, replicates=0)
    with pytest.raises(ValueError):
        SimulationParams(p=0.5, d=2, n=2, seed=-1)
    p = SimulationParams(p=0.5, d=3, n=4, replicates=7, seed=11)
    assert p.replace(n=5).n == 5 and p.replace(n=5).seed == 11


def test_sampling_is_deterministic_and_replicates_differ():
    p = SimulationParams(p=0.4, d=2, n=6, replicates=3, seed=9)
    a = sample_configuration(p, 1)
    assert a == sample_configuration(p, 1)
    assert a != sample_configuration(p, 2)
    assert a != sample_configuration(p.replace(seed=10), 1)
    with pytest.raises(IndexError):
        sample_configuration(p, 3)


def test_extreme_probabilities():
    p = SimulationParams(p=0.0, d=3, n=2, replicates=2)
    assert sample_configuration(p, 0).n_open == 0
    assert sample_configuration(p.replace(p=1.0), 1).n_open == Window(2, 3).n_faces


def test_uniforms_pass_chi_square():
    x = uniforms(123, 0, 0, 200_000)
    counts, _ = np.histogram(x, bins=50, range=(0, 1))
    assert stats.chisquare(counts).pvalue > 1e-4
    assert 0.0 <= x.min() and x.max() < 1.0


def test_open_fraction_is_binomial():
    w = Window(10, 2)
    p = 0.3
    opened = sum(sample_configuration(SimulationParams(p, 2, 10, 20, 5), r).n_open for r in range(20))
    total = 20 * w.n_faces
    z = (opened - p * total) / np.sqrt(total * p * (1 - p))
    assert abs(z) < 4


def test_streams_are_independent():
    a = uniforms(1, 0, 0, 5000)
    b = uniforms(1, 1, 0, 5000)
    assert abs(stats.pearsonr(a, b)[0]) < 0.06


@given(st.floats(0, 1), st.floats(0, 1))
@settings(max_examples=40)
def test_threshold_is_monotone(p1, p2):
    lo, hi = sorted((p1, p2))
    f = coupled_field(Window(3, 2), seed=4)
    a, b = threshold(f, lo).open_faces, threshold(f, hi).open_faces
    assert not (a & ~b).any()


def test_configuration_is_immutable():
    cfg = Configuration.all_open(Window(1, 2))
    with pytest.raises(ValueError):
        cfg.open_faces[0] = False
    with pytest.raises(ValueError):
        Configuration(Window(1, 2), np.zeros(3, dtype=bool))


def test_with_faces_and_is_open():
    w = Window(1, 2)
    q = Face(1, (0, 0))
    cfg = Configuration.all_closed(w).with_faces(opened=[q])
    assert cfg.is_open(q) and cfg.n_open == 1
    assert not cfg.is_open(Face(1, (5, 0)))  # outside the window is closed
    assert cfg.with_faces(closed=[q]).n_open == 0


@given(
    st.integers(2, 3), st.integers(0, 3), st.integers(0, 2**64 - 1),
    st.one_of(st.none(), st.floats(0, 1)), st.integers(0, 2**32),
)
@settings(max_examples=40, deadline=None)
def test_snapshot_round_trip(d, n, seed, p_label, bits_seed):
    w = Window(n, d)
    bits = np.random.default_rng(bits_seed).random(w.n_faces) < 0.5
    cfg = Configuration(w, bits, p_label=p_label, seed=seed)
    back = configuration_from_bytes(configuration_to_bytes(cfg))
    assert back == cfg
    assert back.seed == seed
    assert back.p_label == p_label


def test_snapshot_file_and_corruption(tmp_path):
    cfg = sample_configuration(SimulationParams(0.5, 2, 3, 1, 8), 0)
    path = tmp_path / "c.bin"
    save_snapshot(cfg, path)
    assert load_snapshot(path) == cfg
    raw = path.read_bytes()
    with pytest.raises(ValueError):
        configuration_from_bytes(b"NOTMAGIC" + raw[8:])
    with pytest.raises(ValueError):
        configuration_from_bytes(raw[:-1])
    # set a padding bit beyond the last face
    w = cfg.window
    if w.n_faces % 8:
        bad = bytearray(raw)
        bad[-1] |= 0x80
        with pytest.raises(ValueError):
            configuration_from_bytes(bytes(bad))
