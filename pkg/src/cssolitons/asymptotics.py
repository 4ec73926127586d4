"""Low-curvature asymptotics: regions R+-(K), Grim Reaper arcs, logarithmic
spiral asymptotes, and the shooting search for trapped directions.

Unbounded soliton ends with small scale-invariant curvature nu track
generalized logarithmic spirals e^{sigma (alpha + A)} Gamma.  For alpha > 0
the region R+(K) is forward invariant and every orbit in it converges to a
spiral; for alpha < 0 there is, through every point with |a| >= K, a
direction anti-aligned with the drive vector whose forward orbit never
leaves R-(K) and follows a reversed spiral outward.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .flow import Event, IntegratorOptions, Trajectory, _finish_trajectory, integrate
from .params import PhaseState, SolitonParams
from .skewlin import dilate_rotate_exp, rotation_exp, skew_normal_form


@dataclass(frozen=True)
class RegionSpec:
    """Threshold K for the low-curvature regions R+-(K)."""

    K: float

    def __post_init__(self):
        if self.K <= 0:
            raise ValueError("K must be positive")


def region_membership(params: SolitonParams, state: PhaseState, spec: RegionSpec) -> str:
    """Return "R+", "R-" or "neither" for one state."""
    a = params.drive(state.C)
    a_norm = float(np.linalg.norm(a))
    if a_norm < 1e-14 or a_norm < spec.K:
        return "neither"
    mu = float(a @ state.T) / a_norm
    nu = a_norm**4 * max(1.0 - mu**2, 0.0)
    if nu > spec.K:
        return "neither"
    if mu > 0:
        return "R+"
    if mu < 0:
        return "R-"
    return "neither"


def _membership_mask(traj: Trajectory, spec: RegionSpec, sign: int) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        mu_ok = traj.mu < 0 if sign < 0 else traj.mu > 0
        mask = (traj.a_norm >= spec.K) & (traj.nu <= spec.K) & mu_ok
    return mask & ~np.isnan(traj.mu)


def nu_rate(params: SolitonParams, state: PhaseState) -> float:
    """Exact d nu/ds at a state.

    nu = |a|^4 - <a,T>^2 |a|^2 with a' = (alpha + A) T and T' = p_T(a), so
    d nu/ds = 4 |a|^2 <a,a'> - 2 <a,T>(<a',T> + <a,T'>)|a|^2 - 2 <a,T>^2 <a,a'>.
    """
    C, T = state.C, state.T
    a = params.drive(C)
    ap = params.alpha * T + params.A @ T
    Tp = a - (a @ T) * T
    aT = float(a @ T)
    aap = float(a @ ap)
    a2 = float(a @ a)
    return 4.0 * a2 * aap - 2.0 * aT * (float(ap @ T) + float(a @ Tp)) * a2 - 2.0 * aT**2 * aap


@dataclass(frozen=True)
class GrimReaperArc:
    """One detected low-|mu| arc with its Grim Reaper fit."""

    s_start: float
    s_end: float
    length: float
    length_bound: float
    A0: float
    mu_endpoints: tuple[float, float]
    fit_error: float


def detect_gr_arcs(traj: Trajectory, threshold_c: float | None = None) -> list[GrimReaperArc]:
    """Find maximal arcs where |mu| <= 1 - c |a|^{-4} and |a| >= c, and fit
    each against the exact translating soliton with velocity a at the arc's
    maximum-curvature point."""
    params = traj.params
    if threshold_c is None:
        threshold_c = 4.0 * np.linalg.norm(params.alpha * np.eye(params.n) + params.A, 2)
    c = threshold_c
    with np.errstate(invalid="ignore", divide="ignore"):
        mask = (traj.a_norm >= c) & (np.abs(traj.mu) <= 1.0 - c * traj.a_norm ** (-4.0))
    mask &= ~np.isnan(traj.mu)

    arcs: list[GrimReaperArc] = []
    i = 0
    N = len(traj)
    while i < N:
        if not mask[i]:
            i += 1
            continue
        j = i
        while j + 1 < N and mask[j + 1]:
            j += 1
        if j - i + 1 >= 3:
            arcs.append(_fit_arc(traj, i, j, c))
        i = j + 1
    return arcs


def _fit_arc(traj: Trajectory, i: int, j: int, c: float) -> GrimReaperArc:
    params = traj.params
    seg = slice(i, j + 1)
    k = i + int(np.argmax(traj.curvature[seg]))
    A0 = float(traj.a_norm[k])
    length = float(traj.s[j] - traj.s[i])

    # exact Grim Reaper moving with velocity a(C_k), anchored at the
    # maximum-curvature sample
    a_k = params.drive(traj.C[k])
    gr_params = SolitonParams(
        alpha=0.0, spectrum=skew_normal_form(np.zeros((params.n, params.n))), v=a_k
    )
    state_k = traj.state(k)
    half_f = float(traj.s[j] - traj.s[k])
    half_b = float(traj.s[k] - traj.s[i])
    opts = IntegratorOptions(tol=1e-10, max_step=max(length / 200.0, 1e-3), c_norm_cap=None)
    pieces = []
    if half_b > 0:
        pieces.append(integrate(gr_params, state_k, (0.0, -half_b), opts).C)
    if half_f > 0:
        pieces.append(integrate(gr_params, state_k, (0.0, half_f), opts).C)
    gr_points = np.vstack(pieces)
    arc_points = traj.C[seg]
    d12 = np.max(cKDTree(gr_points).query(arc_points)[0])
    d21 = np.max(cKDTree(arc_points).query(gr_points)[0])
    return GrimReaperArc(
        s_start=float(traj.s[i]),
        s_end=float(traj.s[j]),
        length=length,
        length_bound=float(c / A0 * np.log(max(A0, 1.0 + 1e-12))),
        A0=A0,
        mu_endpoints=(float(traj.mu[i]), float(traj.mu[j])),
        fit_error=float(max(d12, d21)),
    )


@dataclass(frozen=True)
class SpiralFit:
    """Asymptotic spiral data: C(sigma) ~ e^{sign * sigma (alpha + A)} Gamma."""

    Gamma: np.ndarray
    sign: int
    sigma: np.ndarray
    residuals: np.ndarray
    decay_rate: float
    gamma_estimates: np.ndarray

    def __post_init__(self):
        if len(self.residuals) < 10:
            raise ValueError("decay-rate fit needs at least 10 residual samples")


def spiral_fit(
    traj: Trajectory,
    sign: int,
    region: RegionSpec | None = None,
    tail_fraction: float = 0.5,
) -> SpiralFit:
    """Extract the spiral limit Gamma from the trajectory tail.

    Gamma_m = e^{-sign sigma_m (alpha + A)} C(sigma_m) converges at rate
    2|alpha|; the last two samples give a Richardson-accelerated limit.  The
    residual |C(sigma) - e^{sign sigma (alpha + A)} Gamma| is evaluated
    stably as e^{sign alpha sigma} |Gamma_m - Gamma| and fitted for its
    decay rate, expected ~ |alpha|.
    """
    params = traj.params
    if params.alpha == 0.0:
        raise ValueError("spiral fit requires alpha != 0")
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    if region is not None:
        mask = _membership_mask(traj, region, sign)
        if not mask[-1]:
            raise ValueError(
                f"tail leaves the region at sample {int(len(mask) - 1 - np.argmax(mask[::-1]))}"
            )

    i0 = int(
        np.searchsorted(
            traj.sigma,
            traj.sigma[0] + (1.0 - tail_fraction) * (traj.sigma[-1] - traj.sigma[0]),
        )
    )
    i0 = max(min(i0, len(traj) - 12), 0)
    if region is not None:
        mask = _membership_mask(traj, region, sign)
        if not np.all(mask):
            # start of the final contiguous in-region block
            last_block_start = len(mask) - int(np.argmin(mask[::-1]))
            i0 = max(i0, last_block_start)
    sig = traj.sigma[i0:]
    C = traj.C[i0:]
    gammas = np.array(
        [dilate_rotate_exp(params.alpha, params.spectrum, -sign * s_) @ c
         for s_, c in zip(sig, C)]
    )
    # Richardson: Gamma_m = Gamma + c r^m with r = e^{-2 |alpha| d sigma}
    dsig = sig[-1] - sig[-2]
    r = np.exp(-2.0 * abs(params.alpha) * dsig)
    Gamma = gammas[-1] + (r / (1.0 - r)) * (gammas[-1] - gammas[-2])
    with np.errstate(over="ignore"):
        resid = np.exp(sign * params.alpha * sig) * np.linalg.norm(gammas - Gamma, axis=1)
    # fit the decay rate on the decaying branch only: past the residual
    # minimum the noise in Gamma_m (integration tolerance) is amplified by
    # e^{|alpha| sigma} and the residual grows again
    finite = np.isfinite(resid) & (resid > 0)
    imin = int(np.argmin(np.where(finite, resid, np.inf)))
    ok = finite & (sig <= sig[imin] - 0.5 / abs(params.alpha))
    ok[-2:] = False  # Richardson consumed the last two samples
    if np.sum(ok) >= 10:
        slope = np.polyfit(sig[ok], np.log(resid[ok]), 1)[0]
    else:
        slope = np.nan
    return SpiralFit(
        Gamma=Gamma,
        sign=sign,
        sigma=sig,
        residuals=resid,
        decay_rate=float(-slope),
        gamma_estimates=gammas,
    )


@dataclass(frozen=True)
class ShootResult:
    """Outcome of the trapped-direction search."""

    T0: np.ndarray
    achieved_span: float
    cap: float
    horizon: float
    candidates: tuple[tuple[float, float], ...]
    method: str
    trajectory: Trajectory | None


def _region_inside_fn(params: SolitonParams, K: float, sign: int):
    def fn(s, C, T):
        a = params.drive(C)
        an = np.linalg.norm(a)
        if an < 1e-300:
            return -1.0
        mu = (a @ T) / an
        nu = an**4 * max(1.0 - mu * mu, 0.0)
        return min(K - nu, an - K, sign * mu)

    return fn


def _exit_trajectory(params, C0, T0, spec, horizon, opts) -> Trajectory:
    ev = Event(name="region_exit", fn=_region_inside_fn(params, spec.K, -1))
    return integrate(params, PhaseState(C=C0, T=T0), (0.0, horizon), opts, events=(ev,))


def shoot_trapped_direction(
    params: SolitonParams,
    C0: np.ndarray,
    spec: RegionSpec,
    horizon: float,
    cap_factor: float | None = None,
    opts: IntegratorOptions | None = None,
    threads: int = 1,
) -> ShootResult:
    """Search for T0 near -a_hat(C0) whose forward orbit stays in R-(K).

    The direct search (bisection on the cap angle for n = 2, great-circle
    sections refined by pattern search for n = 3, pattern search only for
    n >= 4) maximizes the exit time over the spherical cap.  Because the
    trapped orbit repels its neighbors at rate ~ |a| per unit arc length,
    direct forward integration can certify only O(log(1/eps)/|a|) of trapped
    span; when the direct span falls short of the horizon and the rotation
    symmetry allows it (n = 2, or n = 3 with a single rotation plane), the
    trapped orbit is re-computed along its contracting direction by
    integrating the aligned inward flow from far outside down to |C| = |C0|
    and reversing orientation.  The certified span is measured on that orbit.
    """
    if params.alpha >= 0:
        raise ValueError("shooting targets alpha < 0 (use R+ invariance for alpha > 0)")
    C0 = np.asarray(C0, dtype=float)
    a0 = params.drive(C0)
    a0n = float(np.linalg.norm(a0))
    if a0n < spec.K:
        raise ValueError("|a(C0)| must be at least K")
    a_hat = a0 / a0n
    if cap_factor is None:
        # widen the nominal K |a0|^{-4} cap to the region-entry width
        # sqrt(K) |a0|^{-2}
        cap_factor = a0n**2 / np.sqrt(spec.K)
    cap = cap_factor * spec.K / a0n**4
    if opts is None:
        opts = IntegratorOptions(tol=1e-12, c_norm_cap=1e7)

    n = params.n
    base = -a_hat
    # orthonormal frame of the tangent space at -a_hat
    Q, _ = np.linalg.qr(np.column_stack([base, np.eye(n)]))
    tangent = Q[:, 1:n]

    def direction(angles: np.ndarray) -> np.ndarray:
        offset = tangent @ np.atleast_1d(angles)
        r = np.linalg.norm(offset)
        if r < 1e-300:
            return base
        return np.cos(r) * base + np.sin(r) * (offset / r)

    evaluated: dict[tuple, float] = {}

    def exit_span(angles: np.ndarray) -> float:
        key = tuple(np.round(np.atleast_1d(angles), 16))
        if key not in evaluated:
            traj = _exit_trajectory(params, C0, direction(angles), spec, horizon, opts)
            evaluated[key] = float(traj.s[-1]) if traj.event is not None else horizon
        return evaluated[key]

    def exit_side(angles: np.ndarray) -> float:
        """Which way the orbit peels off: sign of the cross-track component
        of T relative to -a_hat at the exit sample."""
        traj = _exit_trajectory(params, C0, direction(angles), spec, horizon, opts)
        T_end = traj.T[-1]
        a_end = params.drive(traj.C[-1])
        an = np.linalg.norm(a_end)
        dev = T_end + a_end / an
        comp = tangent.T @ dev
        return float(comp[0]) if np.linalg.norm(comp) > 0 else 0.0

    if n == 2:
        method = "bisection"
        best = _bisect_1d(exit_span, exit_side, cap, horizon)
    elif n == 3:
        method = "section+pattern"
        best = _section_search(exit_span, exit_side, cap, horizon, threads)
    else:
        method = "pattern"
        best = _pattern_search(exit_span, np.zeros(n - 1), cap, horizon, threads)

    T0 = direction(best)
    direct = exit_span(best)
    candidates = tuple(
        (float(np.linalg.norm(np.array(k))), v) for k, v in sorted(evaluated.items())
    )

    if direct >= horizon:
        traj = _exit_trajectory(params, C0, T0, spec, horizon, opts)
        return ShootResult(T0, direct, cap, horizon, candidates, method, traj)

    refined = _reversed_manifold_orbit(params, C0, spec, horizon, opts)
    if refined is not None:
        T0_ref, span_ref, traj_ref = refined
        if span_ref > direct and float(np.linalg.norm(T0_ref + a_hat)) <= cap:
            return ShootResult(
                T0_ref, span_ref, cap, horizon, candidates,
                method + "+reversed-manifold", traj_ref,
            )
    return ShootResult(T0, direct, cap, horizon, candidates, method, None)


def _bisect_1d(exit_span, exit_side, cap: float, horizon: float) -> np.ndarray:
    lo, hi = np.array([-cap]), np.array([cap])
    side_lo, side_hi = exit_side(lo), exit_side(hi)
    if side_lo * side_hi < 0:
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if exit_span(mid) >= horizon or hi[0] - lo[0] < 1e-16 * max(cap, 1e-300):
                return mid
            if exit_side(mid) * side_lo < 0:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)
    return _golden_1d(exit_span, cap, horizon)


def _golden_1d(exit_span, cap: float, horizon: float) -> np.ndarray:
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = -cap, cap
    c1 = b - phi * (b - a)
    c2 = a + phi * (b - a)
    f1, f2 = exit_span(np.array([c1])), exit_span(np.array([c2]))
    for _ in range(120):
        if b - a < 1e-16 * max(cap, 1e-300) or max(f1, f2) >= horizon:
            break
        if f1 < f2:
            a, c1, f1 = c1, c2, f2
            c2 = a + phi * (b - a)
            f2 = exit_span(np.array([c2]))
        else:
            b, c2, f2 = c2, c1, f1
            c1 = b - phi * (b - a)
            f1 = exit_span(np.array([c1]))
    return np.array([c1 if f1 >= f2 else c2])


def _section_search(exit_span, exit_side, cap: float, horizon: float, threads: int) -> np.ndarray:
    """n = 3: bisect along great-circle sections of the 2-dim cap at several
    azimuths, then refine the best section result by pattern search."""
    best, best_val = np.zeros(2), exit_span(np.zeros(2))
    for psi in np.linspace(0.0, np.pi, 4, endpoint=False):
        u = np.array([np.cos(psi), np.sin(psi)])

        def span_1d(x):
            return exit_span(x[0] * u)

        def side_1d(x):
            return exit_side(x[0] * u)

        x = _bisect_1d(span_1d, side_1d, cap, horizon)
        val = span_1d(x)
        if val > best_val:
            best, best_val = x[0] * u, val
        if best_val >= horizon:
            return best
    return _pattern_search(exit_span, best, cap, horizon, threads)


def _pattern_search(exit_span, x0: np.ndarray, cap: float, horizon: float, threads: int) -> np.ndarray:
    """Coordinate pattern search over the cap disc with shrinking stencil."""
    x = x0.copy()
    step = cap / 2.0
    fx = exit_span(x)
    ex = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        while step > 1e-14 * max(cap, 1e-300) and fx < horizon:
            cands = []
            for i in range(len(x)):
                for sgn in (-1.0, 1.0):
                    y = x.copy()
                    y[i] += sgn * step
                    if np.linalg.norm(y) <= cap:
                        cands.append(y)
            vals = list(ex.map(exit_span, cands)) if ex is not None else [
                exit_span(y) for y in cands
            ]
            if cands and max(vals) > fx:
                k = int(np.argmax(vals))
                x, fx = cands[k], vals[k]
            else:
                step /= 2.0
    finally:
        if ex is not None:
            ex.shutdown()
    return x


def _integrate_to_radius(params, CA, TA, r0, opts, stages: int = 3):
    """Integrate forward until |C| = r0 (crossing from above), refining the
    crossing in several passes with shrinking max_step so the final crossing
    state is accurate to integrator tolerance rather than to the linear
    event interpolation of one large step.

    Returns (s, C, T) arrays ending at the crossing, or None if no crossing.
    """
    op = abs(params.alpha) + max((p.omega for p in params.spectrum.planes), default=0.0)
    span_max = 4.0 * (np.linalg.norm(CA) - r0 + 1.0) * op / abs(params.alpha)
    ev = Event(name="radius", fn=lambda s, C, T: np.linalg.norm(C) - r0)
    s_all: list[np.ndarray] = []
    C_all: list[np.ndarray] = []
    T_all: list[np.ndarray] = []
    state = PhaseState(C=CA, T=TA)
    s_off = 0.0
    max_step = np.inf
    for stage in range(stages):
        o = IntegratorOptions(
            tol=opts.tol, max_step=max_step, c_norm_cap=None, max_steps=opts.max_steps
        )
        traj = integrate(params, state, (0.0, span_max), o, events=(ev,))
        if traj.event is None:
            return None
        if stage == stages - 1 or len(traj) < 3:
            s_all.append(traj.s + s_off)
            C_all.append(traj.C)
            T_all.append(traj.T)
            break
        # keep everything before the last full step, restart from there with
        # a much smaller step bound across the crossing
        cut = len(traj) - 2
        s_all.append(traj.s[:cut] + s_off)
        C_all.append(traj.C[:cut])
        T_all.append(traj.T[:cut])
        s_off += traj.s[cut - 1] if cut > 0 else 0.0
        state = traj.state(cut - 1) if cut > 0 else state
        gap = traj.s[-1] - (traj.s[cut - 1] if cut > 0 else 0.0)
        span_max = 4.0 * max(gap, 1e-12)
        max_step = max(gap / 64.0, 1e-12)
    s = np.concatenate(s_all)
    C = np.vstack(C_all)
    T = np.vstack(T_all)
    keep = np.concatenate([[True], np.diff(s) > 0])
    return s[keep], C[keep], T[keep]


def _reversed_manifold_orbit(params, C0, spec, horizon, opts):
    """Compute the trapped orbit through C0 along its contracting direction.

    For alpha < 0 the aligned state T = +a_hat is forward stable and flows
    inward, which is exactly the orientation reversal of the anti-aligned
    trapped orbit flowing outward.  Integrate from far outside down to
    |C| = |C0|, rotate the crossing onto C0 by a rotation commuting with A,
    and reverse orientation.  Returns (T0, certified span, trajectory) or
    None when the symmetry reduction is unavailable.
    """
    n = params.n
    r0 = float(np.linalg.norm(C0))
    planes = params.spectrum.planes
    if len(planes) != 1 or n not in (2, 3):
        return None
    omega = planes[0].omega
    # anchor radius: inward radial speed is |alpha| r / |a|, so the arc
    # length from R down to r0 is about sqrt(alpha^2 + omega^2)/|alpha| (R - r0)
    # inward radial speed is |alpha|/sqrt(alpha^2 + omega^2) per unit arc
    factor = abs(params.alpha) / np.sqrt(params.alpha**2 + omega**2)
    R = r0 + 1.2 * (horizon + 5.0) * factor

    def crossing(u_anchor: np.ndarray):
        CA = R * u_anchor
        aA = params.drive(CA)
        return _integrate_to_radius(params, CA, aA / np.linalg.norm(aA), r0, opts)

    if n == 2:
        res = crossing(C0 / r0)
        if res is None:
            return None
    else:
        axis_vec = params.Pi_N @ C0
        zn = float(np.linalg.norm(axis_vec))
        axis = axis_vec / zn if zn > 1e-12 else params.spectrum.null_basis[:, 0]
        w_dir = params.Pi_R @ C0
        wn = float(np.linalg.norm(w_dir))
        w_hat = w_dir / wn if wn > 1e-12 else planes[0].u

        def crossing_at(theta: float):
            u = np.cos(theta) * axis + np.sin(theta) * w_hat
            res = crossing(u)
            if res is None:
                return None, None
            z_cross = float((params.Pi_N @ res[1][-1]) @ axis)
            return z_cross, res

        z_target = zn
        theta0 = np.arccos(np.clip(zn / r0, -1.0, 1.0))
        t_lo = max(theta0 - 0.5, 1e-3)
        t_hi = min(theta0 + 0.5, np.pi / 2.0)
        z_lo, res_lo = crossing_at(t_lo)
        z_hi, res_hi = crossing_at(t_hi)
        for _ in range(8):
            if z_lo is None or z_hi is None:
                return None
            if (z_lo - z_target) * (z_hi - z_target) <= 0:
                break
            t_lo = max(t_lo - 0.3, 1e-3)
            t_hi = min(t_hi + 0.3, np.pi - 1e-3)
            z_lo, res_lo = crossing_at(t_lo)
            z_hi, res_hi = crossing_at(t_hi)
        else:
            return None
        res = None
        for _ in range(64):
            t_mid = 0.5 * (t_lo + t_hi)
            z_mid, res_mid = crossing_at(t_mid)
            if z_mid is None:
                return None
            res = res_mid
            if abs(z_mid - z_target) < 1e-11 * max(r0, 1.0):
                break
            if (z_lo - z_target) * (z_mid - z_target) <= 0:
                t_hi, z_hi = t_mid, z_mid
            else:
                t_lo, z_lo = t_mid, z_mid
        if res is None:
            return None

    s_arr, C_arr, T_arr = res
    Qrot = _matching_rotation(params, C_arr[-1], C0)
    if Qrot is None:
        return None
    Cr = C_arr @ Qrot.T
    Tr = -(T_arr @ Qrot.T)
    s_rev = s_arr[-1] - s_arr[::-1]
    Cr, Tr = Cr[::-1], Tr[::-1]
    T0 = Tr[0] / np.linalg.norm(Tr[0])

    a = params.alpha * Cr + Cr @ params.A.T
    inv_a = 1.0 / np.maximum(np.linalg.norm(a, axis=1), 1e-300)
    g = np.sqrt(1.0 + np.einsum("ij,ij->i", Cr, Cr))
    ds = np.diff(s_rev)
    sigma = np.concatenate([[0.0], np.cumsum(0.5 * (inv_a[1:] + inv_a[:-1]) * ds)])
    varsig = np.concatenate([[0.0], np.cumsum(0.5 * (g[1:] + g[:-1]) * ds)])
    rows = list(zip(s_rev, Cr, Tr))
    out = _finish_trajectory(
        params, rows, sigma, varsig,
        {"status": "reversed-manifold", "rtol": opts.tol, "atol": opts.tol,
         "n_accepted": len(s_rev), "n_rejected": 0, "max_tangent_drift": 0.0},
        None,
    )

    mask = _membership_mask(out, spec, -1)
    if not np.all(mask):
        first_out = int(np.argmin(mask))
        if first_out == 0:
            return None
        span = float(out.s[first_out - 1] - out.s[0])
    else:
        span = float(out.s[-1] - out.s[0])
    return T0, span, out


def _matching_rotation(params, X, C0):
    """Rotation commuting with A taking X to C0; requires matching null
    components and matching range-component norms, and a single rotation
    plane."""
    planes = params.spectrum.planes
    if len(planes) != 1:
        return None
    W_X = params.Pi_R @ X
    W_0 = params.Pi_R @ C0
    Z_X = params.Pi_N @ X
    Z_0 = params.Pi_N @ C0
    if abs(np.linalg.norm(W_X) - np.linalg.norm(W_0)) > 1e-6 * max(np.linalg.norm(W_0), 1.0):
        return None
    if np.linalg.norm(Z_X - Z_0) > 1e-6 * max(np.linalg.norm(Z_0), 1.0):
        return None
    p = planes[0]
    ang = np.arctan2(W_0 @ p.v, W_0 @ p.u) - np.arctan2(W_X @ p.v, W_X @ p.u)
    return rotation_exp(params.spectrum, ang / p.omega)
