"""Constructors for the named solitons used as fixtures everywhere else.

Labels: line, shrinking_circle, grim_reaper, yin_yang, brakke_wedge,
abresch_langer.  Each fixture carries parameters, an initial phase state,
a closed-form evaluator where one exists, and the expected value of the
almost-Lyapunov function V where it is constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .flow import IntegratorOptions, Trajectory, integrate
from .params import PhaseState, SolitonParams
from .skewlin import skew_normal_form

LABELS = (
    "line",
    "shrinking_circle",
    "grim_reaper",
    "yin_yang",
    "brakke_wedge",
    "abresch_langer",
)


@dataclass(frozen=True)
class NamedSoliton:
    label: str
    params: SolitonParams
    initial_state: PhaseState
    closed_form: Callable[[np.ndarray], np.ndarray] | None
    expected_V: float | None


def _rotation_about_z(omega: float) -> np.ndarray:
    return np.array([[0.0, -omega, 0.0], [omega, 0.0, 0.0], [0.0, 0.0, 0.0]])


def _planar_rotation(omega: float) -> np.ndarray:
    return np.array([[0.0, -omega], [omega, 0.0]])


def make(label: str, **kw) -> NamedSoliton:
    """Build a named soliton fixture.

    Keyword options by label:
      line:             alpha (default 0), n (default 3), omega (default 1;
                        0 for no rotation)
      shrinking_circle: alpha < 0 (default -1), omega (default 1),
                        n in {2, 3} (default 2), orientation (+1/-1)
      grim_reaper:      speed (default 1)
      yin_yang:         omega (default 1)
      brakke_wedge:     alpha > 0 (default 1), offset (default 1)
      abresch_langer:   alpha < 0 (default -1), radius_ratio (default 1.5)
    """
    if label == "line":
        alpha = kw.get("alpha", 0.0)
        n = kw.get("n", 3)
        omega = kw.get("omega", 1.0)
        A = _rotation_about_z(omega) if n == 3 else np.zeros((n, n))
        params = SolitonParams(alpha=alpha, spectrum=skew_normal_form(A), v=np.zeros(n))
        direction = np.zeros(n)
        direction[-1] = 1.0
        state = PhaseState(C=np.zeros(n), T=direction)
        return NamedSoliton(
            label, params, state,
            closed_form=lambda s: np.outer(np.asarray(s), direction),
            expected_V=0.0,
        )

    if label == "shrinking_circle":
        alpha = kw.get("alpha", -1.0)
        omega = kw.get("omega", 1.0)
        n = kw.get("n", 2)
        orientation = kw.get("orientation", 1.0)
        if alpha >= 0:
            raise ValueError("shrinking_circle requires alpha < 0")
        A = _planar_rotation(omega) if n == 2 else _rotation_about_z(omega)
        params = SolitonParams(alpha=alpha, spectrum=skew_normal_form(A), v=np.zeros(n))
        r = 1.0 / np.sqrt(-alpha)
        C0 = np.zeros(n)
        C0[0] = r
        T0 = np.zeros(n)
        T0[1] = orientation
        expected_V = orientation * omega / np.sqrt(-np.e * alpha)

        def circle(s: np.ndarray) -> np.ndarray:
            phi = orientation * np.asarray(s) / r
            out = np.zeros((len(np.atleast_1d(phi)), n))
            out[:, 0] = r * np.cos(phi)
            out[:, 1] = r * np.sin(phi)
            return out

        return NamedSoliton(label, params, PhaseState(C=C0, T=T0), circle, expected_V)

    if label == "grim_reaper":
        speed = kw.get("speed", 1.0)
        params = SolitonParams(
            alpha=0.0, spectrum=skew_normal_form(np.zeros((2, 2))),
            v=np.array([0.0, speed]),
        )
        state = PhaseState(C=np.zeros(2), T=np.array([1.0, 0.0]))

        def reaper(x: np.ndarray) -> np.ndarray:
            x = np.asarray(x)
            return np.column_stack([x, -np.log(np.cos(speed * x)) / speed])

        return NamedSoliton(label, params, state, reaper, None)

    if label == "yin_yang":
        omega = kw.get("omega", 1.0)
        params = SolitonParams(
            alpha=0.0, spectrum=skew_normal_form(_planar_rotation(omega)), v=np.zeros(2)
        )
        state = PhaseState(C=np.zeros(2), T=np.array([1.0, 0.0]))
        return NamedSoliton(label, params, state, None, 0.0)

    if label == "brakke_wedge":
        alpha = kw.get("alpha", 1.0)
        offset = kw.get("offset", 1.0)
        if alpha <= 0:
            raise ValueError("brakke_wedge requires alpha > 0")
        params = SolitonParams(
            alpha=alpha, spectrum=skew_normal_form(np.zeros((2, 2))), v=np.zeros(2)
        )
        state = PhaseState(C=np.array([0.0, offset]), T=np.array([1.0, 0.0]))
        return NamedSoliton(label, params, state, None, None)

    if label == "abresch_langer":
        alpha = kw.get("alpha", -1.0)
        ratio = kw.get("radius_ratio", 1.5)
        if alpha >= 0:
            raise ValueError("abresch_langer requires alpha < 0")
        params = SolitonParams(
            alpha=alpha, spectrum=skew_normal_form(np.zeros((2, 2))), v=np.zeros(2)
        )
        r0 = ratio / np.sqrt(-alpha)
        state = PhaseState(C=np.array([r0, 0.0]), T=np.array([0.0, 1.0]))
        return NamedSoliton(label, params, state, None, 0.0)

    raise ValueError(f"unknown soliton label: {label!r} (expected one of {LABELS})")


@dataclass(frozen=True)
class ALProfile:
    trajectory: Trajectory
    rotation_number: float
    near_closure: bool
    radial_bounds: tuple[float, float]


def abresch_langer_profile(
    alpha: float,
    radius_ratio: float,
    s_span: tuple[float, float],
    opts: IntegratorOptions | None = None,
) -> ALProfile:
    """Integrate a planar purely shrinking profile, reporting the tangent
    rotation number over the span and whether the curve nearly closes.

    radius_ratio scales the initial radius against the circle value
    1/sqrt(-alpha); ratio 1 reproduces the shrinking circle.
    """
    if alpha >= 0:
        raise ValueError("requires alpha < 0")
    fixture = make("abresch_langer", alpha=alpha, radius_ratio=radius_ratio)
    if opts is None:
        opts = IntegratorOptions(tol=1e-11, max_step=0.01)
    traj = integrate(fixture.params, fixture.initial_state, s_span, opts)
    angles = np.unwrap(np.arctan2(traj.T[:, 1], traj.T[:, 0]))
    rotation_number = float((angles[-1] - angles[0]) / (2.0 * np.pi))
    r = np.linalg.norm(traj.C, axis=1)
    # closure: the phase point returns near its start after leaving it
    d = np.sqrt(
        np.sum((traj.C - traj.C[0]) ** 2, axis=1) + np.sum((traj.T - traj.T[0]) ** 2, axis=1)
    )
    far = np.where(d > 0.5)[0]
    near_closure = bool(far.size and np.min(d[far[0]:]) < 1e-4)
    return ALProfile(
        trajectory=traj,
        rotation_number=rotation_number,
        near_closure=near_closure,
        radial_bounds=(float(np.min(r)), float(np.max(r))),
    )
