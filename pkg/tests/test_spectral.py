import math

import numpy as np
import pytest

from sterile_ips.spectral import (
    KINDS,
    EigenFamily,
    SpectralIndexError,
    alpha,
    delta,
    eval_U,
    eval_V,
    eval_W,
    fd_residual,
    gamma,
    gram_matrix,
    observed_order,
    simpson_weights,
    v_display,
)


def test_v_display_examples():
    assert v_display(0, 0.3) == pytest.approx(0.0, abs=1e-15)
    assert v_display(2, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert v_display(2, 0.5) == pytest.approx(-1.0, abs=1e-15)
    with pytest.raises(SpectralIndexError):
        v_display(-1, 0.0)


def test_v_display_neumann_only_for_odd_k():
    h = 1e-6
    for k in range(1, 6):
        slope = (v_display(k, 1.0) - v_display(k, 1.0 - h)) / h
        assert (abs(slope) < 1e-4) == (k % 2 == 1)


def test_w_examples():
    assert eval_W(0, -1.0) == pytest.approx(0.0, abs=1e-15)
    assert gamma(0) == pytest.approx((math.pi / 4) ** 2)
    assert gamma(0) == pytest.approx(0.61685, abs=1e-5)
    fam = EigenFamily("DN")
    for k in range(6):
        assert abs(fam.d1(k, np.array([[1.0]]))[0]) < 1e-10


def test_u_examples():
    assert abs(eval_U(1, 1.0)) < 1e-15 and abs(eval_U(1, -1.0)) < 1e-15
    assert delta(1) == pytest.approx(math.pi ** 2)
    assert delta((1, 1), d=2) == pytest.approx(2 * math.pi ** 2)
    with pytest.raises(SpectralIndexError):
        eval_U(0, 0.0)


def test_v_family():
    assert alpha(0) == 0.0
    assert alpha((2, 1), d=2) == pytest.approx(math.pi ** 2 + math.pi ** 2)
    assert np.allclose(eval_V(0, np.linspace(-1, 1, 5)), 1 / math.sqrt(2))


def test_index_validation():
    with pytest.raises(SpectralIndexError):
        EigenFamily("NN", d=2).value((1,), np.zeros((1, 2)))
    with pytest.raises(SpectralIndexError):
        EigenFamily("NN", d=2).value((1, 0), np.zeros((1, 2)))
    with pytest.raises(ValueError):
        EigenFamily("XX")


@pytest.mark.parametrize("kind", KINDS)
def test_boundary_compliance(kind):
    fam = EigenFamily(kind)
    for k in fam.indices(10):
        assert max(fam.boundary_defects(k).values()) < 1e-10


@pytest.mark.parametrize("kind", KINDS)
def test_boundary_compliance_2d(kind):
    fam = EigenFamily(kind, d=2)
    u = np.linspace(0, 1, 7)[:, None]
    for k in fam.indices(6):
        assert max(fam.boundary_defects(k, u).values()) < 1e-10


@pytest.mark.parametrize("kind", KINDS)
def test_eigenvalues_monotone_in_each_index(kind):
    fam = EigenFamily(kind, d=2)
    first = 1 if kind == "DD" else 0
    for a in range(first, first + 4):
        for b in range(1, 5):
            assert fam.eigenvalue((a + 1, b)) > fam.eigenvalue((a, b))
            assert fam.eigenvalue((a, b + 1)) > fam.eigenvalue((a, b))


def test_indices_sorted():
    fam = EigenFamily("NN", d=2)
    idx = fam.indices(12)
    ev = [fam.eigenvalue(k) for k in idx]
    assert ev == sorted(ev) and len(set(idx)) == 12


@pytest.mark.parametrize("kind", KINDS)
def test_gram(kind):
    fam = EigenFamily(kind)
    assert gram_matrix(fam, 1)[0, 0] == pytest.approx(1.0, abs=1e-8)
    assert np.abs(gram_matrix(fam, 10) - np.eye(10)).max() < 1e-6


def test_gram_other_family():
    W = EigenFamily("DN")
    G = gram_matrix(W, 6, other=W)
    off = G - np.diag(np.diag(G))
    assert np.abs(off).max() < 1e-6


def test_simpson_exact_for_cubics():
    x, w = simpson_weights(10, -1.0, 1.0)
    assert len(x) % 2 == 1
    assert (w * x ** 3).sum() == pytest.approx(0.0, abs=1e-14)
    assert (w * x ** 2).sum() == pytest.approx(2 / 3)


@pytest.mark.parametrize("kind", KINDS)
def test_second_order_residual(kind):
    fam = EigenFamily(kind)
    for k in fam.indices(5):
        if fam.eigenvalue(k) == 0:
            assert fd_residual(fam, k, 51) < 1e-12
            continue
        assert observed_order(fam, k) >= 1.9


def test_fd_residual_needs_d1():
    with pytest.raises(ValueError):
        fd_residual(EigenFamily("DD", d=2), (1, 1), 11)
