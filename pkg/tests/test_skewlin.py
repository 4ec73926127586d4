import numpy as np
import pytest
from scipy.linalg import expm

from conftest import random_skew, rot3
from cssolitons.skewlin import (
    dilate_rotate_exp,
    normal_form_rotation,
    pinv,
    proj_null,
    proj_range,
    rotation_exp,
    skew_normal_form,
)


def test_rejects_non_skew():
    with pytest.raises(ValueError):
        skew_normal_form(np.array([[0.0, 1.0], [1.0, 0.0]]))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 7, 8])
def test_reconstruction_random(rng, n):
    M = random_skew(rng, n)
    spec = skew_normal_form(M)
    assert np.linalg.norm(spec.matrix - M) < 1e-12 * max(np.linalg.norm(M), 1.0)


def test_plane_relations(rng):
    M = random_skew(rng, 6)
    spec = skew_normal_form(M)
    for p in spec.planes:
        assert p.omega > 0
        assert abs(p.u @ p.u - 1) < 1e-12
        assert abs(p.v @ p.v - 1) < 1e-12
        assert abs(p.u @ p.v) < 1e-12
        assert np.linalg.norm(M @ p.u - p.omega * p.v) < 1e-10
        assert np.linalg.norm(M @ p.v + p.omega * p.u) < 1e-10


def test_null_space_and_projectors(rng):
    M = random_skew(rng, 5)  # odd dimension: null space is nontrivial
    spec = skew_normal_form(M)
    assert spec.null_dim() >= 1
    assert np.linalg.norm(M @ spec.null_basis) < 1e-10
    Pn, Pr = proj_null(spec), proj_range(spec)
    assert np.linalg.norm(Pn + Pr - np.eye(5)) < 1e-12
    assert np.linalg.norm(Pn @ Pn - Pn) < 1e-12
    assert np.linalg.norm(Pn @ M) < 1e-10


def test_degenerate_frequencies():
    # three planes at the same frequency
    blocks = [np.array([[0.0, -2.0], [2.0, 0.0]])] * 3
    M = np.zeros((6, 6))
    for k, b in enumerate(blocks):
        M[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = b
    # conjugate by a random rotation so the planes are not axis-aligned
    rng = np.random.default_rng(7)
    Q = np.linalg.qr(rng.standard_normal((6, 6)))[0]
    Mc = Q @ M @ Q.T
    Mc = 0.5 * (Mc - Mc.T)
    spec = skew_normal_form(Mc)
    assert len(spec.planes) == 3
    assert np.allclose(spec.frequencies, 2.0)
    assert np.linalg.norm(spec.matrix - Mc) < 1e-11
    assert len(spec.distinct) == 1
    assert spec.distinct[0].basis.shape == (6, 6)


def test_rotation_exp_matches_expm(rng):
    M = random_skew(rng, 5)
    spec = skew_normal_form(M)
    for theta in (0.3, -1.7, 4.0):
        assert np.linalg.norm(rotation_exp(spec, theta) - expm(theta * M)) < 1e-11


def test_dilate_rotate_exp(rng):
    M = random_skew(rng, 4)
    spec = skew_normal_form(M)
    alpha, sigma = 0.7, 1.3
    want = expm(sigma * (alpha * np.eye(4) + M))
    assert np.linalg.norm(dilate_rotate_exp(alpha, spec, sigma) - want) < 1e-10


def test_pinv(rng):
    M = random_skew(rng, 5)
    spec = skew_normal_form(M)
    Mp = pinv(spec)
    assert np.linalg.norm(Mp - np.linalg.pinv(M)) < 1e-10


def test_normal_form_rotation(rng):
    M = random_skew(rng, 6)
    spec = skew_normal_form(M)
    S = normal_form_rotation(spec)
    assert np.linalg.norm(S @ S.T - np.eye(6)) < 1e-12
    # S conjugates M into 2x2 blocks on consecutive axis pairs
    B = S.T @ M @ S
    for k, p in enumerate(spec.planes):
        i = 2 * k
        assert abs(B[i + 1, i] - p.omega) < 1e-10
        assert abs(B[i, i + 1] + p.omega) < 1e-10
    off = B.copy()
    for k in range(len(spec.planes)):
        off[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = 0.0
    assert np.linalg.norm(off) < 1e-10


def test_resonance_detection():
    def freq_matrix(omegas):
        n = 2 * len(omegas)
        M = np.zeros((n, n))
        for k, w in enumerate(omegas):
            M[2 * k, 2 * k + 1] = -w
            M[2 * k + 1, 2 * k] = w
        return M

    spec = skew_normal_form(freq_matrix([1.0, 2.0, 3.0]))
    assert spec.resonance.is_resonant
    assert spec.resonance.ratios == (1, 2, 3)
    assert abs(spec.resonance.base_rate - 1.0) < 1e-12

    spec = skew_normal_form(freq_matrix([1.0, np.sqrt(2.0)]))
    assert not spec.resonance.is_resonant
    assert "incommensurate" in spec.resonance.report

    spec = skew_normal_form(freq_matrix([1.5, 2.5]))
    assert spec.resonance.is_resonant
    assert spec.resonance.ratios == (3, 5)
    assert abs(spec.resonance.base_rate - 0.5) < 1e-12


def test_zero_matrix():
    spec = skew_normal_form(np.zeros((3, 3)))
    assert len(spec.planes) == 0
    assert spec.null_dim() == 3
    assert np.linalg.norm(rotation_exp(spec, 2.0) - np.eye(3)) < 1e-15


def test_rot3_axis():
    spec = skew_normal_form(rot3(2.0))
    assert len(spec.planes) == 1
    assert abs(spec.planes[0].omega - 2.0) < 1e-12
    assert spec.null_dim() == 1
    assert abs(abs(spec.null_basis[2, 0]) - 1.0) < 1e-12
