"""Closed-form static-symmetry (category A) solutions: shrinking helices.

A category-A invariant curve is c(eps, t) = e^{eps M} C0(t) + eps v with
C0 solving dC0/dt = M^2 C0 / (|v|^2 + |M C0|^2).  After the time change
dt/d tau = |v|^2 + sum_j omega_j^2 e^{-2 omega_j^2 tau} |C_j|^2 the profile
is a sum of decaying modes C0(tau) = sum_j e^{-omega_j^2 tau} C_j, one per
rotation plane.  For v = 0 the profile satisfies |C0(t)|^2 = 2 (T - t) and
the rescaled curve runs Curve Shortening on the unit sphere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .skewlin import SkewSpectrum, rotation_exp


@dataclass(frozen=True)
class HelixSolution:
    """Mode data of one helix: spectrum of M, one mode vector per plane
    (possibly zero), axis translation v in N(M), and the singular time."""

    spectrum: SkewSpectrum
    modes: tuple[np.ndarray, ...]
    v: np.ndarray
    T_singular: float
    index_k: int | None
    index_l: int | None


def make_helix(spectrum: SkewSpectrum, modes, v) -> HelixSolution:
    """Build a HelixSolution, checking each mode lies in its plane and fixing
    the singular time so that (for v = 0) |C0(t)|^2 = 2 (T - t)."""
    v = np.asarray(v, dtype=float)
    modes = tuple(np.asarray(m, dtype=float) for m in modes)
    if len(modes) != len(spectrum.planes):
        raise ValueError("one mode vector required per rotation plane")
    for m, p in zip(modes, spectrum.planes):
        in_plane = (m @ p.u) * p.u + (m @ p.v) * p.v
        if np.linalg.norm(m - in_plane) > 1e-12 * max(np.linalg.norm(m), 1.0):
            raise ValueError("mode vector must lie in its rotation plane")
    if np.linalg.norm(spectrum.matrix @ v) > 1e-12 * max(np.linalg.norm(v), 1.0):
        raise ValueError("v must lie in the null space of M")
    nonzero = [j for j, m in enumerate(modes) if np.linalg.norm(m) > 0]
    if np.linalg.norm(v) > 0:
        T_sing = np.inf
    else:
        if not nonzero:
            raise ValueError("helix with v = 0 needs at least one nonzero mode")
        T_sing = 0.5 * sum(float(m @ m) for m in modes)
    return HelixSolution(
        spectrum=spectrum,
        modes=modes,
        v=v,
        T_singular=float(T_sing),
        index_k=nonzero[0] if nonzero else None,
        index_l=nonzero[-1] if nonzero else None,
    )


def helix_profile(sol: HelixSolution, tau: float) -> np.ndarray:
    """C0(tau) = sum_j e^{-omega_j^2 tau} C_j."""
    out = np.zeros(sol.spectrum.n)
    for m, p in zip(sol.modes, sol.spectrum.planes):
        out += np.exp(-(p.omega**2) * tau) * m
    return out


def time_of_tau(sol: HelixSolution, tau: float) -> float:
    """Closed-form antiderivative of dt/d tau, anchored so that for v = 0
    t -> T_singular as tau -> +infinity (equivalently |C0|^2 = 2 (T - t)),
    and t(0) = 0 when v != 0."""
    decay = sum(
        0.5 * float(m @ m) * np.exp(-2.0 * p.omega**2 * tau)
        for m, p in zip(sol.modes, sol.spectrum.planes)
    )
    vv = float(sol.v @ sol.v)
    if vv > 0:
        decay0 = sum(0.5 * float(m @ m) for m in sol.modes)
        return vv * tau - decay + decay0
    return sol.T_singular + vv * tau - decay


def _dt_dtau(sol: HelixSolution, tau: float) -> float:
    return float(sol.v @ sol.v) + sum(
        p.omega**2 * float(m @ m) * np.exp(-2.0 * p.omega**2 * tau)
        for m, p in zip(sol.modes, sol.spectrum.planes)
    )


def tau_of_time(sol: HelixSolution, t: float) -> float:
    """Invert time_of_tau by geometric bracketing plus safeguarded Newton."""
    if np.linalg.norm(sol.v) == 0 and t >= sol.T_singular:
        raise ValueError("t must be below the singular time when v = 0")
    lo = hi = 0.0
    f0 = time_of_tau(sol, 0.0) - t
    if f0 > 0:
        step = 1.0
        while time_of_tau(sol, lo) - t > 0:
            hi = lo
            lo -= step
            step *= 2.0
    else:
        step = 1.0
        while time_of_tau(sol, hi) - t < 0:
            lo = hi
            hi += step
            step *= 2.0
    tau = 0.5 * (lo + hi)
    for _ in range(200):
        f = time_of_tau(sol, tau) - t
        if f > 0:
            hi = tau
        else:
            lo = tau
        d = _dt_dtau(sol, tau)
        tau_new = tau - f / d if d > 0 else 0.5 * (lo + hi)
        if not (lo < tau_new < hi):
            tau_new = 0.5 * (lo + hi)
        if abs(tau_new - tau) < 1e-14 * max(1.0, abs(tau)):
            return tau_new
        tau = tau_new
    return tau


def sample_curve(sol: HelixSolution, t: float, eps_grid: np.ndarray) -> np.ndarray:
    """Polyline c(eps, t) = e^{eps M} C0(t) + eps v over the given grid."""
    C0 = helix_profile(sol, tau_of_time(sol, t))
    return np.array(
        [rotation_exp(sol.spectrum, e) @ C0 + e * sol.v for e in np.asarray(eps_grid)]
    )


def sphere_rescale(
    sol: HelixSolution, t: float, eps_grid: np.ndarray | None = None
) -> tuple[float, np.ndarray]:
    """Rescale c(t, .) / sqrt(2 (T - t)) onto the unit sphere, returning the
    sphere time theta = -(1/2) log(T - t) and the rescaled polyline."""
    if np.linalg.norm(sol.v) > 0:
        raise ValueError("sphere rescaling requires v = 0")
    if t >= sol.T_singular:
        raise ValueError("t must be below the singular time")
    if eps_grid is None:
        eps_grid = np.linspace(0.0, 2.0 * np.pi, 201)
    theta = -0.5 * np.log(sol.T_singular - t)
    curve = sample_curve(sol, t, eps_grid)
    return theta, curve / np.sqrt(2.0 * (sol.T_singular - t))


def integrate_profile_ode(
    sol: HelixSolution, t_span: tuple[float, float], rtol: float = 1e-12, atol: float = 1e-12
):
    """Direct numerical integration of dC0/dt = M^2 C0 / (|v|^2 + |M C0|^2)
    from the closed-form initial profile; the independent oracle for the
    time-change formula."""
    M = sol.spectrum.matrix
    vv = float(sol.v @ sol.v)

    def rhs(t, C):
        MC = M @ C
        return (M @ MC) / (vv + MC @ MC)

    C_init = helix_profile(sol, tau_of_time(sol, t_span[0]))
    return solve_ivp(rhs, t_span, C_init, rtol=rtol, atol=atol, dense_output=True)


def resolve_time_coefficient(sol: HelixSolution | None = None) -> dict:
    """Adjudicate the two candidate closed forms of the t-tau relation.

    Candidate "half":          t = const + |v|^2 tau - sum (1/2) e^{-2 w_j^2 tau} |C_j|^2
    Candidate "omega_over_2":  t = const + |v|^2 tau - sum (w_j/2) e^{-2 w_j^2 tau} |C_j|^2

    Only the first differentiates to dt/d tau = |v|^2 +
    sum w_j^2 e^{-2 w_j^2 tau} |C_j|^2; the direct integration of the profile
    ODE decides numerically.  Run with a frequency far from 1 so the two
    candidates separate.
    """
    from .skewlin import skew_normal_form

    if sol is None:
        M = np.array([[0.0, -2.0], [2.0, 0.0]])
        spec = skew_normal_form(M)
        sol = make_helix(spec, [spec.planes[0].u.copy()], np.zeros(2))

    omegas = np.array([p.omega for p in sol.spectrum.planes])
    norms2 = np.array([float(m @ m) for m in sol.modes])

    vv = float(sol.v @ sol.v)

    def t_candidate(tau: float, half: bool) -> float:
        # both candidates anchored at t(0) = 0 so only the rate distinguishes
        coef = 0.5 if half else omegas / 2.0
        decay0 = np.sum(coef * norms2)
        decay = np.sum(coef * norms2 * np.exp(-2.0 * omegas**2 * tau))
        return vv * tau + float(decay0 - decay)

    taus = np.linspace(0.0, 0.4, 21)
    t_half = np.array([t_candidate(tau, True) for tau in taus])
    t_alt = np.array([t_candidate(tau, False) for tau in taus])
    t_end = min(t_half[-1], t_alt[-1])

    M = sol.spectrum.matrix

    def rhs(t, C):
        MC = M @ C
        return (M @ MC) / (vv + MC @ MC)

    res = solve_ivp(
        rhs, (0.0, t_end), helix_profile(sol, 0.0), rtol=1e-12, atol=1e-12,
        dense_output=True,
    )

    def deviation(ts: np.ndarray) -> float:
        dev = 0.0
        for tau, t in zip(taus, ts):
            if t > t_end:
                continue
            C_pred = helix_profile(sol, tau)
            dev = max(dev, float(np.linalg.norm(res.sol(t) - C_pred)))
        return dev

    dev_half = deviation(t_half)
    dev_alt = deviation(t_alt)
    confirmed = "half" if dev_half < dev_alt else "omega_over_2"
    # backward limit radius |C0(t)| / sqrt(-t) as t -> -infinity: the
    # candidates predict sqrt(2) (half) vs sqrt(2 / omega_l) (omega_over_2)
    t_back = -1e8
    radius = float(
        np.linalg.norm(helix_profile(sol, tau_of_time(sol, t_back))) / np.sqrt(-t_back)
    ) if vv == 0 else None
    return {
        "deviation_half": dev_half,
        "deviation_omega_over_2": dev_alt,
        "confirmed": confirmed,
        "backward_limit_radius": radius,
        "note": (
            "time change fixed by requiring |C0(t)|^2 = 2 (T - t) for v = 0; "
            "the coefficient 1/2 is the one consistent with "
            "dt/dtau = |v|^2 + sum omega_j^2 e^{-2 omega_j^2 tau} |C_j|^2, "
            "and the backward limit radius is sqrt(2) independent of omega"
        ),
    }
