import numpy as np
import pytest

from conftest import make_params, rot2, rot3, unit
from cssolitons.flow import (
    Event,
    IntegratorOptions,
    Trajectory,
    csf_residual,
    evolve_family,
    integrate,
    integrate_compactified,
    integrate_to_sigma,
)
from cssolitons.params import PhaseState, compactify


def test_circle_orbit():
    p = make_params(-1.0, rot2())
    st = PhaseState(C=np.array([1.0, 0.0]), T=np.array([0.0, 1.0]))
    tr = integrate(p, st, (0.0, 20.0), IntegratorOptions(tol=1e-11))
    r = np.linalg.norm(tr.C, axis=1)
    assert np.max(np.abs(r - 1.0)) < 1e-8
    assert tr.stats["max_tangent_drift"] < 1e-9


def test_line_orbit():
    p = make_params(0.5, rot3())
    direction = np.array([0.0, 0.0, 1.0])
    st = PhaseState(C=np.zeros(3), T=direction)
    tr = integrate(p, st, (0.0, 5.0), IntegratorOptions(tol=1e-11))
    assert np.max(np.linalg.norm(tr.C - tr.s[:, None] * direction, axis=1)) < 1e-10
    assert np.max(np.linalg.norm(tr.T - direction, axis=1)) < 1e-10


def test_backward_integration_ascending():
    p = make_params(0.0, rot2(), v=None)
    st = PhaseState(C=np.array([0.3, 0.1]), T=unit([1.0, 0.5]))
    tr = integrate(p, st, (0.0, -3.0), IntegratorOptions(tol=1e-10))
    assert np.all(np.diff(tr.s) > 0)
    assert abs(tr.s[0] + 3.0) < 1e-12
    assert np.allclose(tr.C[-1], st.C, atol=1e-12)
    # sigma and varsigma are zeroed at the array start
    assert tr.sigma[0] == 0.0 and tr.varsigma[0] == 0.0


def test_forward_backward_consistency():
    p = make_params(-0.5, rot3())
    st = PhaseState(C=np.array([0.7, 0.2, 0.4]), T=unit([0.1, 1.0, -0.3]))
    fwd = integrate(p, st, (0.0, 2.0), IntegratorOptions(tol=1e-12))
    back = integrate(p, fwd.state(len(fwd) - 1), (2.0, 0.0), IntegratorOptions(tol=1e-12))
    assert np.linalg.norm(back.C[0] - st.C) < 1e-8
    assert np.linalg.norm(back.T[0] - st.T) < 1e-8


def test_event_detection():
    p = make_params(0.0, np.zeros((2, 2)), v=np.array([0.0, 1.0]))
    st = PhaseState(C=np.zeros(2), T=np.array([1.0, 0.0]))
    ev = Event(name="x_hits_1", fn=lambda s, C, T: C[0] - 1.0)
    tr = integrate(p, st, (0.0, 5.0), IntegratorOptions(tol=1e-10), events=(ev,))
    assert tr.event is not None and tr.event[0] == "x_hits_1"
    assert abs(tr.C[-1][0] - 1.0) < 1e-6


def test_c_norm_cap_event():
    p = make_params(1.0, rot2())
    st = PhaseState(C=np.array([1.0, 0.0]), T=np.array([0.0, 1.0]))
    tr = integrate(p, st, (0.0, 50.0), IntegratorOptions(tol=1e-9, c_norm_cap=10.0))
    assert tr.event is not None and tr.event[0] == "c_norm_cap"
    assert abs(np.linalg.norm(tr.C[-1]) - 10.0) < 1e-3


def test_fixed_step_spacing():
    p = make_params(0.0, rot2())
    st = PhaseState(C=np.array([0.5, 0.0]), T=np.array([0.0, 1.0]))
    tr = integrate(p, st, (0.0, 2.0), IntegratorOptions(fixed_step=1e-3))
    seg = np.diff(tr.s)
    assert np.min(seg) > 0.5e-3
    assert np.max(seg) < 1.5e-3


def test_sigma_varsigma_quadrature():
    # pure translation: |a| = 1 so sigma = s, and C moves along v from 0
    p = make_params(0.0, np.zeros((2, 2)), v=np.array([0.0, 1.0]))
    st = PhaseState(C=np.zeros(2), T=np.array([0.0, 1.0]))
    # trapezoid quadrature for sigma/varsigma: accuracy set by the step size
    tr = integrate(p, st, (0.0, 3.0), IntegratorOptions(tol=1e-11, max_step=0.01))
    assert np.max(np.abs(tr.sigma - tr.s)) < 1e-8
    # varsigma = int sqrt(1 + s^2) ds along the line
    want = 0.5 * (tr.s * np.sqrt(1 + tr.s**2) + np.arcsinh(tr.s))
    # O(h^2) quadrature: at h = 0.01 the accumulated error sits near 1e-5
    assert np.max(np.abs(tr.varsigma - want)) < 2e-5


def test_trajectory_requires_increasing_s():
    p = make_params(0.0, rot2())
    with pytest.raises(ValueError):
        Trajectory(
            params=p, s=np.array([0.0, 0.0]), C=np.zeros((2, 2)), T=np.ones((2, 2)),
            sigma=np.zeros(2), varsigma=np.zeros(2), a_norm=np.zeros(2),
            lam=np.zeros(2), mu=np.zeros(2), nu=np.zeros(2), curvature=np.zeros(2),
            V=np.zeros(2), delta_total=np.zeros(2), delta_W=np.zeros(2),
            z=np.zeros(2), stats={},
        )


def test_compactified_matches_standard():
    p = make_params(-1.0, rot3())
    st = PhaseState(C=np.array([0.8, 0.0, 0.3]), T=np.array([0.0, 1.0, 0.0]))
    tr = integrate(p, st, (0.0, 5.0), IntegratorOptions(tol=1e-12))
    ct = integrate_compactified(p, compactify(st), (0.0, tr.varsigma[-1]), IntegratorOptions(tol=1e-12))
    P_end = ct.P[-1]
    C_end = P_end / np.sqrt(1.0 - P_end @ P_end)
    assert np.linalg.norm(C_end - tr.C[-1]) < 1e-6
    assert np.linalg.norm(ct.T[-1] - tr.T[-1]) < 1e-6
    assert abs(ct.s[-1] - tr.s[-1]) < 1e-5


def test_compactified_boundary_stationary():
    p = make_params(-1.0, rot2())
    from cssolitons.params import CompactState

    st = CompactState(P=np.array([1.0, 0.0]), T=np.array([0.0, 1.0]))
    ct = integrate_compactified(p, st, (0.0, 3.0), IntegratorOptions(tol=1e-11))
    assert np.max(np.linalg.norm(ct.P - st.P, axis=1)) < 1e-10


def test_compactified_rejects_translation():
    p = make_params(0.0, np.zeros((2, 2)), v=np.array([0.0, 1.0]))
    from cssolitons.params import CompactState

    with pytest.raises(ValueError):
        integrate_compactified(p, CompactState(P=np.zeros(2), T=np.array([1.0, 0.0])), (0.0, 1.0))


def test_compact_to_trajectory_roundtrip():
    p = make_params(-1.0, rot2())
    st = PhaseState(C=np.array([0.6, 0.1]), T=unit([0.2, 1.0]))
    ct = integrate_compactified(p, compactify(st), (0.0, 4.0), IntegratorOptions(tol=1e-11))
    tr = ct.to_trajectory()
    assert np.all(np.diff(tr.s) > 0)
    assert np.linalg.norm(tr.C[0] - st.C) < 1e-10


def test_evolve_family_translating():
    p = make_params(0.0, np.zeros((2, 2)), v=np.array([0.0, 1.0]))
    prof = np.array([[0.0, 0.0], [1.0, 0.5]])
    out = evolve_family(p, prof, 2.0)
    assert np.allclose(out, prof + 2.0 * p.v, atol=1e-14)


def test_evolve_family_identity_at_t0():
    p = make_params(-1.0, rot2())
    prof = np.array([[1.0, 0.0], [0.0, 1.0]])
    t0 = 1.0 / (2.0 * p.alpha)
    assert np.allclose(evolve_family(p, prof, t0), prof, atol=1e-14)


def test_evolve_family_circle_radius():
    alpha = -0.5
    p = make_params(alpha, rot2())
    theta = np.linspace(0, 2 * np.pi, 50)
    r0 = 1.0 / np.sqrt(-alpha)
    prof = r0 * np.column_stack([np.cos(theta), np.sin(theta)])
    t0 = 1.0 / (2.0 * alpha)
    for t in (-2.0, -1.5, t0):
        out = evolve_family(p, prof, t)
        want = r0 * np.sqrt(1.0 + 2.0 * alpha * (t - t0))
        assert np.max(np.abs(np.linalg.norm(out, axis=1) - want)) < 1e-12


def test_evolve_family_sign_check():
    p = make_params(-1.0, rot2())
    with pytest.raises(ValueError):
        evolve_family(p, np.zeros((2, 2)), 1.0)


def test_csf_residual_grim_reaper():
    p = make_params(0.0, np.zeros((2, 2)), v=np.array([0.0, 1.0]))
    x = np.linspace(-1.2, 1.2, 2401)
    prof = np.column_stack([x, -np.log(np.cos(x))])
    stats = csf_residual(p, prof, 0.5, 1e-3)
    assert stats.max < 1e-4


def test_csf_residual_tolerates_duplicate_samples():
    p = make_params(0.0, np.zeros((2, 2)), v=np.array([0.0, 1.0]))
    x = np.linspace(-1.0, 1.0, 2001)
    x = np.insert(x, 1000, x[1000] + 1e-12)  # near-duplicate sample
    prof = np.column_stack([x, -np.log(np.cos(x))])
    stats = csf_residual(p, prof, 0.5, 1e-3)
    assert stats.max < 1e-4


def test_integrate_to_sigma_reaches_target():
    p = make_params(1.0, rot3())
    st = PhaseState(C=np.array([1.0, 0.0, 0.5]), T=np.array([0.0, 1.0, 0.0]))
    tr = integrate_to_sigma(p, st, 6.0, IntegratorOptions(tol=1e-10))
    assert abs(tr.sigma[-1] - 6.0) < 1e-8
    assert tr.stats["max_tangent_drift"] < 1e-6
    # overlaps the explicit integrator on an early window
    tr0 = integrate(p, st, (0.0, tr.s[40]), IntegratorOptions(tol=1e-11))
    j = 40
    assert np.linalg.norm(tr.C[j] - tr0.C[-1]) < 1e-6
