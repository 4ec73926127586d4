import numpy as np
import pytest

from cssolitons.catalog import LABELS, abresch_langer_profile, make
from cssolitons.flow import IntegratorOptions, integrate


def test_all_labels_construct():
    for label in LABELS:
        fx = make(label)
        assert fx.label == label
        assert abs(np.linalg.norm(fx.initial_state.T) - 1.0) < 1e-12


def test_unknown_label():
    with pytest.raises(ValueError):
        make("moebius")


def test_parameter_validation():
    with pytest.raises(ValueError):
        make("shrinking_circle", alpha=1.0)
    with pytest.raises(ValueError):
        make("brakke_wedge", alpha=-1.0)
    with pytest.raises(ValueError):
        make("abresch_langer", alpha=0.5)


def test_circle_closed_form_and_v():
    fx = make("shrinking_circle")
    tr = integrate(fx.params, fx.initial_state, (0.0, 10.0), IntegratorOptions(tol=1e-11))
    want = fx.closed_form(tr.s)
    assert np.max(np.linalg.norm(tr.C - want, axis=1)) < 1e-7
    assert np.max(np.abs(tr.V - fx.expected_V)) < 1e-9
    assert abs(fx.expected_V - 1.0 / np.sqrt(np.e)) < 1e-12


def test_circle_orientation_flips_v():
    plus = make("shrinking_circle", orientation=1.0)
    minus = make("shrinking_circle", orientation=-1.0)
    assert abs(plus.expected_V + minus.expected_V) < 1e-14


def test_line_stays_straight():
    fx = make("line", alpha=0.7)
    tr = integrate(fx.params, fx.initial_state, (0.0, 4.0), IntegratorOptions(tol=1e-11))
    want = fx.closed_form(tr.s)
    assert np.max(np.linalg.norm(tr.C - want, axis=1)) < 1e-9
    assert np.max(np.abs(tr.V)) < 1e-12


def test_grim_reaper_graph():
    fx = make("grim_reaper")
    tr = integrate(fx.params, fx.initial_state, (-1.4, 1.4), IntegratorOptions(tol=1e-11))
    x = tr.C[:, 0]
    want = fx.closed_form(x)
    assert np.max(np.abs(tr.C[:, 1] - want[:, 1])) < 1e-7


def test_abresch_langer_circle_limit():
    prof = abresch_langer_profile(-1.0, 1.0, (0.0, 2.0 * np.pi))
    lo, hi = prof.radial_bounds
    assert abs(lo - 1.0) < 1e-8 and abs(hi - 1.0) < 1e-8
    assert abs(prof.rotation_number - 1.0) < 1e-6
    assert prof.near_closure


def test_abresch_langer_oscillation():
    prof = abresch_langer_profile(-1.0, 1.4, (0.0, 30.0))
    lo, hi = prof.radial_bounds
    assert lo < 1.0 < hi  # radius oscillates around the circle value
    assert hi < 2.0  # and stays bounded (trapped annulus)
