"""The soliton flow on R^n x S^{n-1} and its compactified extension.

The profile equation C_s = T, T_s = p_T[(alpha + A) C + v] is integrated by
an embedded Dormand-Prince 5(4) pair with the tangent renormalized to unit
length after every accepted step.  Arc length s is the independent variable;
the spiral parameter sigma (d sigma = ds / |a|) and the compact parameter
varsigma (d varsigma = ds / sqrt(1 - |P|^2), equivalently
d varsigma = sqrt(1 + |C|^2) ds in the interior) are accumulated by
trapezoid quadrature over accepted steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import diagnostics
from .params import CompactState, PhaseState, SolitonParams, decompactify
from .skewlin import rotation_exp

# Dormand-Prince 5(4) tableau
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)


@dataclass(frozen=True)
class IntegratorOptions:
    """Step-control options for the adaptive integrator."""

    tol: float = 1e-10
    rtol: float | None = None
    atol: float | None = None
    max_step: float = np.inf
    fixed_step: float | None = None
    max_steps: int = 2_000_000
    c_norm_cap: float | None = 1e6

    def tolerances(self) -> tuple[float, float]:
        return (
            self.rtol if self.rtol is not None else self.tol,
            self.atol if self.atol is not None else self.tol,
        )


@dataclass(frozen=True)
class Event:
    """Stop condition: integration halts when fn changes sign between steps."""

    name: str
    fn: object  # callable (s, C, T) -> float


@dataclass(frozen=True)
class Trajectory:
    """Arc-length-stamped samples of one orbit with per-sample diagnostics."""

    params: SolitonParams
    s: np.ndarray
    C: np.ndarray
    T: np.ndarray
    sigma: np.ndarray
    varsigma: np.ndarray
    a_norm: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    curvature: np.ndarray
    V: np.ndarray
    delta_total: np.ndarray
    delta_W: np.ndarray
    z: np.ndarray
    stats: dict
    event: tuple[str, float] | None = None

    def __post_init__(self):
        if len(self.s) > 1 and not np.all(np.diff(self.s) > 0):
            raise ValueError("arc length must be strictly increasing")

    def __len__(self) -> int:
        return len(self.s)

    def state(self, i: int) -> PhaseState:
        T = self.T[i]
        return PhaseState(C=self.C[i], T=T / np.linalg.norm(T))


def vector_field(params: SolitonParams, state: PhaseState) -> tuple[np.ndarray, np.ndarray]:
    """Right-hand side of the profile system: dC = T, dT = p_T(a)."""
    a = params.drive(state.C)
    T = state.T
    return T, a - (a @ T) * T


def _initial_step(params, C, T, rtol, atol) -> float:
    a = params.drive(C)
    scale = np.linalg.norm(a - (a @ T) * T) + 1.0
    return min(0.1, (rtol + atol) ** 0.2 / scale)


def _finish_trajectory(params, rows, sigma_rows, varsigma_rows, stats, event):
    s = np.array([r[0] for r in rows])
    C = np.array([r[1] for r in rows])
    T = np.array([r[2] for r in rows])
    sigma = np.asarray(sigma_rows)
    varsigma = np.asarray(varsigma_rows)
    if len(s) > 1 and s[-1] < s[0]:
        s, C, T = s[::-1].copy(), C[::-1].copy(), T[::-1].copy()
        sigma, varsigma = sigma[::-1].copy(), varsigma[::-1].copy()
        sigma -= sigma[0]
        varsigma -= varsigma[0]
    d = diagnostics.sample_arrays(params, C, T)
    return Trajectory(
        params=params,
        s=s,
        C=C,
        T=T,
        sigma=sigma,
        varsigma=varsigma,
        a_norm=d["a_norm"],
        lam=d["lam"],
        mu=d["mu"],
        nu=d["nu"],
        curvature=d["curvature"],
        V=d["V"],
        delta_total=d["delta_total"],
        delta_W=d["delta_W"],
        z=d["z"],
        stats=stats,
        event=event,
    )


def integrate(
    params: SolitonParams,
    state0: PhaseState,
    s_span: tuple[float, float],
    opts: IntegratorOptions = IntegratorOptions(),
    events: tuple[Event, ...] = (),
) -> Trajectory:
    """Integrate the profile system over s_span (backward if s1 < s0).

    The tangent is renormalized after every accepted step; drift before
    renormalization is tracked in stats.  Events are located by linear
    interpolation between the bracketing accepted steps.
    """
    s0, s1 = float(s_span[0]), float(s_span[1])
    if not np.isfinite(s1 - s0):
        raise ValueError("s_span must be finite")
    direction = 1.0 if s1 >= s0 else -1.0
    n = params.n
    rtol, atol = opts.tolerances()

    all_events = list(events)
    if opts.c_norm_cap is not None:
        cap = opts.c_norm_cap
        all_events.append(
            Event(name="c_norm_cap", fn=lambda s, C, T, cap=cap: np.linalg.norm(C) - cap)
        )

    def rhs(y: np.ndarray) -> np.ndarray:
        C, T = y[:n], y[n:]
        a = params.alpha * C + params.A @ C + params.v
        dT = a - (a @ T) * T
        out = np.empty(2 * n)
        out[:n] = T
        out[n:] = dT
        return out

    C = np.asarray(state0.C, dtype=float).copy()
    T = np.asarray(state0.T, dtype=float).copy()
    T /= np.linalg.norm(T)
    y = np.concatenate([C, T])
    s = s0

    if opts.fixed_step is not None:
        h = direction * abs(opts.fixed_step)
    else:
        h = direction * min(_initial_step(params, C, T, rtol, atol), opts.max_step)

    rows = [(s, C.copy(), T.copy())]
    sigma_rows = [0.0]
    varsigma_rows = [0.0]
    ev_prev = [e.fn(s, C, T) for e in all_events]
    f = rhs(y)
    n_accept = n_reject = 0
    max_drift = 0.0
    event_hit = None
    status = "completed"

    K = np.empty((7, 2 * n))
    while direction * (s1 - s) > 1e-15 * max(abs(s), abs(s1), 1.0):
        if n_accept + n_reject >= opts.max_steps:
            status = "max_steps"
            break
        if opts.fixed_step is None:
            h = direction * min(abs(h), opts.max_step, abs(s1 - s))
        else:
            h = direction * min(abs(opts.fixed_step), abs(s1 - s))
        # absorb rounding residue so the run cannot end on a micro-step
        if abs(s1 - (s + h)) <= 1e-9 * abs(h):
            h = s1 - s
        if abs(h) < 1e-14 * max(abs(s), 1.0):
            status = "step_underflow"
            break

        K[0] = f
        for i in range(1, 7):
            K[i] = rhs(y + h * (_DP_A[i] @ K[:i]))
        y_new = y + h * (_DP_B @ K)
        if not np.all(np.isfinite(y_new)):
            status = "nan_detected"
            break
        err_vec = h * (_DP_E @ K)
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = np.sqrt(np.mean((err_vec / sc) ** 2))

        if opts.fixed_step is None and err > 1.0:
            h *= max(0.2, 0.9 * err ** (-0.2))
            n_reject += 1
            continue

        s_new = s + h
        C_new, T_new = y_new[:n], y_new[n:]
        tn = np.linalg.norm(T_new)
        max_drift = max(max_drift, abs(tn - 1.0))
        T_new = T_new / tn
        y_new[n:] = T_new

        a_old = np.linalg.norm(params.drive(y[:n]))
        a_new = np.linalg.norm(params.drive(C_new))
        inv_a = 0.5 * (1.0 / max(a_old, 1e-300) + 1.0 / max(a_new, 1e-300))
        sigma_rows.append(sigma_rows[-1] + direction * abs(h) * inv_a)
        g_old = np.sqrt(1.0 + y[:n] @ y[:n])
        g_new = np.sqrt(1.0 + C_new @ C_new)
        varsigma_rows.append(varsigma_rows[-1] + direction * abs(h) * 0.5 * (g_old + g_new))

        hit = None
        for i, e in enumerate(all_events):
            g1 = e.fn(s_new, C_new, T_new)
            g0 = ev_prev[i]
            if g0 is not None and np.sign(g0) != np.sign(g1) and g1 != g0:
                frac = abs(g0) / (abs(g0) + abs(g1))
                hit = (e.name, frac)
                break
            ev_prev[i] = g1
        if hit is not None:
            name, frac = hit
            s_ev = s + frac * h
            y_ev = y + frac * (y_new - y)
            T_ev = y_ev[n:] / np.linalg.norm(y_ev[n:])
            rows.append((s_ev, y_ev[:n].copy(), T_ev))
            ds = abs(frac * h)
            sigma_rows[-1] = sigma_rows[-2] + direction * ds * inv_a
            varsigma_rows[-1] = varsigma_rows[-2] + direction * ds * 0.5 * (g_old + g_new)
            event_hit = (name, s_ev)
            n_accept += 1
            break

        rows.append((s_new, C_new.copy(), T_new.copy()))
        n_accept += 1
        y = y_new
        s = s_new
        f = rhs(y)
        if opts.fixed_step is None:
            h *= min(5.0, max(0.2, 0.9 * max(err, 1e-10) ** (-0.2)))

    stats = {
        "n_accepted": n_accept,
        "n_rejected": n_reject,
        "max_tangent_drift": max_drift,
        "rtol": rtol,
        "atol": atol,
        "status": status if event_hit is None else "event",
    }
    return _finish_trajectory(params, rows, sigma_rows, varsigma_rows, stats, event_hit)


@dataclass(frozen=True)
class CompactTrajectory:
    """Samples of the compactified flow on the closed ball."""

    params: SolitonParams
    varsigma: np.ndarray
    P: np.ndarray
    T: np.ndarray
    s: np.ndarray
    V: np.ndarray
    stats: dict

    def __len__(self) -> int:
        return len(self.varsigma)

    def to_trajectory(self, opts: IntegratorOptions = IntegratorOptions()) -> Trajectory:
        """Convert an all-interior compact run to a standard Trajectory."""
        if np.any(np.linalg.norm(self.P, axis=1) >= 1.0 - 1e-13):
            raise ValueError("trajectory touches the boundary sphere")
        r2 = np.einsum("ij,ij->i", self.P, self.P)
        C = self.P / np.sqrt(1.0 - r2)[:, None]
        rows = list(zip(self.s, C, self.T))
        params = self.params
        a = params.alpha * C + C @ params.A.T + params.v
        inv_a = 1.0 / np.maximum(np.linalg.norm(a, axis=1), 1e-300)
        ds = np.diff(self.s)
        sigma = np.concatenate([[0.0], np.cumsum(0.5 * (inv_a[1:] + inv_a[:-1]) * ds)])
        return _finish_trajectory(params, rows, sigma, self.varsigma, dict(self.stats), None)


def integrate_to_sigma(
    params: SolitonParams,
    state0: PhaseState,
    sigma_end: float,
    opts: IntegratorOptions = IntegratorOptions(),
    s_cap: float = 1e12,
) -> Trajectory:
    """Integrate forward in arc length until the spiral parameter sigma
    reaches sigma_end, with an implicit solver.

    On low-curvature ends the tangent is attracted to the drive direction at
    rate ~ |a|, which caps explicit steps at ~ 1/|a| while sigma grows only
    logarithmically in arc length.  Radau follows the slow spiral with steps
    that grow with the orbit; sigma and varsigma ride along as extra states,
    so no quadrature error accrues over the long span.
    """
    from scipy.integrate import solve_ivp

    n = params.n
    rtol, atol = opts.tolerances()

    def rhs(s, y):
        C, T = y[:n], y[n:2 * n]
        a = params.alpha * C + params.A @ C + params.v
        an = np.linalg.norm(a)
        out = np.empty(2 * n + 2)
        out[:n] = T
        out[n:2 * n] = a - (a @ T) * T
        out[2 * n] = 1.0 / max(an, 1e-300)
        out[2 * n + 1] = np.sqrt(1.0 + C @ C)
        return out

    B = params.alpha * np.eye(n) + params.A

    def jac(s, y):
        C, T = y[:n], y[n:2 * n]
        a = B @ C + params.v
        an = max(np.linalg.norm(a), 1e-300)
        J = np.zeros((2 * n + 2, 2 * n + 2))
        J[:n, n:2 * n] = np.eye(n)
        J[n:2 * n, :n] = B - np.outer(T, B.T @ T)
        J[n:2 * n, n:2 * n] = -(a @ T) * np.eye(n) - np.outer(T, a)
        J[2 * n, :n] = -(B.T @ a) / an**3
        J[2 * n + 1, :n] = C / np.sqrt(1.0 + C @ C)
        return J

    def reached(s, y):
        return y[2 * n] - sigma_end

    reached.terminal = True
    reached.direction = 1.0

    T0 = np.asarray(state0.T, dtype=float)
    y0 = np.concatenate([state0.C, T0 / np.linalg.norm(T0), [0.0, 0.0]])
    sol = solve_ivp(
        rhs, (0.0, s_cap), y0, method="Radau", rtol=rtol, atol=atol,
        jac=jac, events=reached, dense_output=False,
    )
    if not sol.success:
        raise RuntimeError(f"stiff integration failed: {sol.message}")
    s = sol.t
    Y = sol.y.T
    T = Y[:, n:2 * n]
    norms = np.linalg.norm(T, axis=1)
    rows = list(zip(s, Y[:, :n], T / norms[:, None]))
    stats = {
        "n_accepted": len(s) - 1,
        "n_rejected": 0,
        "max_tangent_drift": float(np.max(np.abs(norms - 1.0))),
        "rtol": rtol,
        "atol": atol,
        "status": "event" if sol.status == 1 else "completed",
        "method": "radau",
    }
    event = ("sigma_end", float(s[-1])) if sol.status == 1 else None
    return _finish_trajectory(params, rows, Y[:, 2 * n], Y[:, 2 * n + 1], stats, event)


def integrate_compactified(
    params: SolitonParams,
    state0: CompactState,
    varsigma_span: tuple[float, float],
    opts: IntegratorOptions = IntegratorOptions(),
) -> CompactTrajectory:
    """Integrate the compactified system P' = (1-|P|^2)(T - <P,T>P),
    T' = p_T((alpha + A) P) in the parameter varsigma.

    Well defined on the closed ball: the boundary sphere is invariant, and in
    the interior ds = sqrt(1 - |P|^2) d varsigma recovers arc length.
    """
    v0, v1 = float(varsigma_span[0]), float(varsigma_span[1])
    direction = 1.0 if v1 >= v0 else -1.0
    n = params.n
    rtol, atol = opts.tolerances()

    def rhs(y: np.ndarray) -> np.ndarray:
        P, T = y[:n], y[n:]
        r2 = P @ P
        aP = params.alpha * P + params.A @ P + params.v * 0.0
        dT = aP - (aP @ T) * T
        out = np.empty(2 * n)
        out[:n] = (1.0 - r2) * (T - (P @ T) * P)
        out[n:] = dT
        return out

    if np.linalg.norm(params.v) > 0:
        raise ValueError("compactified flow implemented for v = 0 (alpha != 0 forces v = 0)")

    y = np.concatenate([state0.P, state0.T / np.linalg.norm(state0.T)])
    t = v0
    h = direction * min(0.01, opts.max_step)
    rows_v = [t]
    rows_P = [y[:n].copy()]
    rows_T = [y[n:].copy()]
    s_rows = [0.0]
    f = rhs(y)
    n_accept = n_reject = 0
    status = "completed"
    K = np.empty((7, 2 * n))
    while direction * (v1 - t) > 1e-15 * max(abs(t), abs(v1), 1.0):
        if n_accept + n_reject >= opts.max_steps:
            status = "max_steps"
            break
        h = direction * min(abs(h), opts.max_step, abs(v1 - t))
        K[0] = f
        for i in range(1, 7):
            K[i] = rhs(y + h * (_DP_A[i] @ K[:i]))
        y_new = y + h * (_DP_B @ K)
        if not np.all(np.isfinite(y_new)):
            status = "nan_detected"
            break
        err_vec = h * (_DP_E @ K)
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = np.sqrt(np.mean((err_vec / sc) ** 2))
        if opts.fixed_step is None and err > 1.0:
            h *= max(0.2, 0.9 * err ** (-0.2))
            n_reject += 1
            continue
        y_new[n:] /= np.linalg.norm(y_new[n:])
        r2_old = y[:n] @ y[:n]
        r2_new = y_new[:n] @ y_new[:n]
        g = 0.5 * (np.sqrt(max(1.0 - r2_old, 0.0)) + np.sqrt(max(1.0 - r2_new, 0.0)))
        s_rows.append(s_rows[-1] + direction * abs(h) * g)
        t += h
        y = y_new
        rows_v.append(t)
        rows_P.append(y[:n].copy())
        rows_T.append(y[n:].copy())
        f = rhs(y)
        n_accept += 1
        h *= min(5.0, max(0.2, 0.9 * max(err, 1e-10) ** (-0.2)))

    P = np.array(rows_P)
    T = np.array(rows_T)
    V = np.array([diagnostics.V_compact(params, p, tt) for p, tt in zip(P, T)])
    stats = {"n_accepted": n_accept, "n_rejected": n_reject, "status": status}
    return CompactTrajectory(
        params=params,
        varsigma=np.array(rows_v),
        P=P,
        T=T,
        s=np.array(s_rows),
        V=V,
        stats=stats,
    )


def evolve_family(params: SolitonParams, profile: np.ndarray, t: float) -> np.ndarray:
    """Reconstruct the evolving curve family from its profile.

    Translating-rotating (alpha = 0): c(t) = e^{t A} profile + t v, with the
    profile at t = 0.  Dilating-rotating (alpha != 0): c(t) =
    e^{eps} e^{eps M} profile with eps = (1/2) log(t / t0), t0 = 1/(2 alpha),
    M = 2 t0 A, with the profile at t = t0.
    """
    profile = np.asarray(profile, dtype=float)
    if params.alpha == 0.0:
        Q = rotation_exp(params.spectrum, t)
        return profile @ Q.T + t * params.v
    t0 = 1.0 / (2.0 * params.alpha)
    if t * t0 <= 0.0:
        raise ValueError("t must have the same sign as t0 = 1/(2 alpha)")
    eps = 0.5 * np.log(t / t0)
    Q = rotation_exp(params.spectrum, 2.0 * t0 * eps)
    return np.exp(eps) * (profile @ Q.T)


@dataclass(frozen=True)
class ResidualStats:
    max: float
    rms: float
    n_interior: int
    warnings: tuple[str, ...] = ()


def csf_residual(
    params: SolitonParams, profile: np.ndarray, t: float, grid_h: float
) -> ResidualStats:
    """Residual p_{c_s}(c_t) - c_ss of the curve shortening equation for the
    reconstructed family, by central differences in t and in arc length."""
    profile = np.asarray(profile, dtype=float)
    seg0 = np.linalg.norm(np.diff(profile, axis=0), axis=1)
    if seg0.size:
        # near-duplicate samples poison the second differences; drop them
        keep = np.concatenate([[True], seg0 > 0.25 * np.median(seg0)])
        profile = profile[keep]
    c0 = evolve_family(params, profile, t)
    cp = evolve_family(params, profile, t + grid_h)
    cm = evolve_family(params, profile, t - grid_h)
    ct = (cp - cm) / (2.0 * grid_h)

    seg = np.linalg.norm(np.diff(c0, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    hm = (s[1:-1] - s[:-2])[:, None]
    hp = (s[2:] - s[1:-1])[:, None]
    c_s = (hm**2 * c0[2:] + (hp**2 - hm**2) * c0[1:-1] - hp**2 * c0[:-2]) / (
        hm * hp * (hm + hp)
    )
    c_ss = 2.0 * (hm * c0[2:] - (hm + hp) * c0[1:-1] + hp * c0[:-2]) / (
        hm * hp * (hm + hp)
    )
    tang = c_s / np.linalg.norm(c_s, axis=1)[:, None]
    ct_i = ct[1:-1]
    resid = ct_i - np.einsum("ij,ij->i", ct_i, tang)[:, None] * tang - c_ss
    norms = np.linalg.norm(resid, axis=1)

    warnings = []
    curv = np.max(np.linalg.norm(c_ss, axis=1))
    if curv * grid_h > 0.1:
        warnings.append(
            f"grid too coarse for local curvature: max curvature {curv:.3g} "
            f"at grid_h {grid_h:.3g}"
        )
    return ResidualStats(
        max=float(np.max(norms)),
        rms=float(np.sqrt(np.mean(norms**2))),
        n_interior=len(norms),
        warnings=tuple(warnings),
    )
