import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sterile_ips.lattice import (
    LatticeError,
    build_lattice,
    decode,
    encode,
    indicators,
    pack_states,
    read_snapshot,
    sample_product,
    unpack_states,
    write_snapshot,
)
from sterile_ips.params import BoundaryData, ModelParams, ParameterError, boundary_preset, extinction_state


@pytest.mark.parametrize("N,d,count", [(1, 1, 3), (2, 1, 5), (3, 2, 21), (2, 3, 20)])
def test_site_count(N, d, count):
    lat = build_lattice(N, d)
    assert lat.site_count == count
    assert lat.coords.shape == (count, d)
    assert len(lat.left_face) == len(lat.right_face) == N ** (d - 1)


def test_index_site_roundtrip():
    lat = build_lattice(3, 2)
    for i in range(lat.site_count):
        assert lat.index(lat.site(i)) == i


def test_out_of_range_rejected():
    lat = build_lattice(2, 2)
    with pytest.raises(LatticeError):
        lat.index((3, 0))
    with pytest.raises(LatticeError):
        lat.index((0, 2))
    with pytest.raises(LatticeError):
        lat.index((0,))
    with pytest.raises(LatticeError):
        build_lattice(0, 1)


def test_neighbors_open_axis_and_torus():
    lat = build_lattice(3, 2)
    assert sorted(lat.neighbors((0, 1))) == [(-1, 1), (0, 0), (0, 2), (1, 1)]
    # face site: no neighbour beyond the open end, torus wraps
    assert sorted(lat.neighbors((-3, 0))) == [(-3, 1), (-3, 2), (-2, 0)]


def test_boundary_side():
    lat = build_lattice(2, 1)
    assert lat.boundary_side.tolist() == [-1, 0, 0, 0, 1]
    assert np.allclose(lat.macroscopic()[:, 0], [-1, -0.5, 0, 0.5, 1])


def test_encode_decode():
    assert encode(0, 0) == 0 and encode(1, 0) == 1 and encode(0, 1) == 2 and encode(1, 1) == 3
    for s in range(4):
        assert encode(*decode(s)) == s
    with pytest.raises(ValueError):
        decode(4)
    with pytest.raises(ValueError):
        encode(2, 0)


@given(st.lists(st.integers(0, 3), min_size=1, max_size=50))
def test_indicators_partition(states):
    eta = indicators(np.array(states, dtype=np.uint8))
    assert np.all(eta.sum(axis=0) == 1)
    assert np.all(eta[np.array(states), np.arange(len(states))] == 1)


@given(st.lists(st.integers(0, 3), min_size=1, max_size=64))
def test_pack_roundtrip(states):
    s = np.array(states, dtype=np.uint8)
    assert np.array_equal(unpack_states(pack_states(s), s.size), s)


@pytest.mark.parametrize("binary", [False, True])
def test_snapshot_roundtrip(tmp_path, binary):
    lat = build_lattice(3, 2)
    s = np.random.default_rng(0).integers(0, 4, lat.site_count).astype(np.uint8)
    path = tmp_path / "snap"
    write_snapshot(path, lat, s, binary=binary)
    lat2, s2 = read_snapshot(path)
    assert (lat2.N, lat2.d) == (3, 2)
    assert np.array_equal(s, s2)


def test_snapshot_rejects_wrong_size(tmp_path):
    lat = build_lattice(2, 1)
    with pytest.raises(ValueError):
        write_snapshot(tmp_path / "x", lat, np.zeros(3, dtype=np.uint8))


def test_sample_product_frequencies():
    lat = build_lattice(2000, 1)
    rng = np.random.default_rng(1)
    s = sample_product(lat, lambda u: np.repeat(np.array([[0.2], [0.3], [0.4]]), len(u), axis=1), rng)
    freq = np.bincount(s, minlength=4) / s.size
    assert np.allclose(freq, [0.1, 0.2, 0.3, 0.4], atol=0.02)


def test_sample_product_deterministic():
    lat = build_lattice(10, 1)
    prof = lambda u: np.full((3, len(u)), 0.25)  # noqa: E731
    a = sample_product(lat, prof, np.random.default_rng(5))
    b = sample_product(lat, prof, np.random.default_rng(5))
    assert np.array_equal(a, b)


# -- parameters ---------------------------------------------------------------


def test_params_validation():
    with pytest.raises(ParameterError):
        ModelParams(D=0.0)
    with pytest.raises(ParameterError):
        ModelParams(lambda1=0.2, lambda2=0.3)
    with pytest.raises(ParameterError):
        ModelParams(theta_l=-1.0)
    assert ModelParams().replace(r=2.0).r == 2.0


def test_boundary_data():
    b = BoundaryData.constant((0.3, 0.2, 0.1), (0.1, 0.3, 0.2))
    assert np.allclose(b.with_empty(-1, np.zeros((2, 0)))[:, 0], [0.4, 0.3, 0.2, 0.1])
    assert b.is_strictly_admissible()
    assert not BoundaryData.constant((0.0, 0.5, 0.5)).is_strictly_admissible()
    with pytest.raises(ParameterError):
        BoundaryData.constant((0.6, 0.6, 0.1))
    with pytest.raises(ParameterError):
        boundary_preset("nope")
    e = boundary_preset("extinction", ModelParams(r=3.0))
    assert b.constants[1] == (0.1, 0.3, 0.2)
    assert e.constants[-1] == extinction_state(3.0) == (0.0, 0.75, 0.0)
