"""Pointwise and along-trajectory functionals of the soliton flow.

Covers the drive vector a = (alpha + A) C + v and its alignment diagnostics
(mu, nu, curvature), the multiplier lambda = -<a, T>, the almost-Lyapunov
function V = e^{(alpha/2)|C|^2 + <v,C>} <T, A C> together with its exact rate,
squared-distance functions delta and z, the null/range splitting of C, and
report generators (extrema counts, planarity rank, axis-graph profile).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

A_ZERO_TOL = 1e-14
EXP_OVERFLOW = 700.0


@dataclass(frozen=True)
class DiagnosticSample:
    """All pointwise functionals at one state.

    mu and nu are None when the drive vector vanishes (a_hat undefined).
    """

    a: np.ndarray
    a_norm: float
    a_hat: np.ndarray | None
    mu: float | None
    nu: float | None
    curvature: float
    lam: float
    V: float
    delta_total: float
    delta_W: float
    z: float
    Z: np.ndarray
    W: np.ndarray


def _V_from_parts(exponent: float, inner: float) -> float:
    if exponent > EXP_OVERFLOW:
        return float(np.sign(inner)) * np.inf if inner != 0.0 else 0.0
    return float(np.exp(exponent) * inner)


def sample(params, state) -> DiagnosticSample:
    """Evaluate every diagnostic at a single state."""
    C, T = state.C, state.T
    a = params.drive(C)
    a_norm = float(np.linalg.norm(a))
    lam = float(-(a @ T))
    if a_norm < A_ZERO_TOL:
        a_hat, mu, nu, curvature = None, None, None, 0.0
    else:
        a_hat = a / a_norm
        mu = float(np.clip(a_hat @ T, -1.0, 1.0))
        nu = float(a_norm**4 * (1.0 - mu**2))
        curvature = float(a_norm * np.sqrt(max(1.0 - mu**2, 0.0)))
    W = params.Pi_R @ C
    Z = params.Pi_N @ C
    exponent = 0.5 * params.alpha * (C @ C) + params.v @ C
    V = _V_from_parts(exponent, float(T @ (params.A @ C)))
    return DiagnosticSample(
        a=a,
        a_norm=a_norm,
        a_hat=a_hat,
        mu=mu,
        nu=nu,
        curvature=curvature,
        lam=lam,
        V=V,
        delta_total=0.5 * float(C @ C),
        delta_W=0.5 * float(W @ W),
        z=float(params.v @ C),
        Z=Z,
        W=W,
    )


def sample_arrays(params, C: np.ndarray, T: np.ndarray) -> dict[str, np.ndarray]:
    """Vectorized diagnostics for stacked states (rows of C and T).

    mu and nu are NaN where the drive vector vanishes.
    """
    a = params.alpha * C + C @ params.A.T + params.v
    a_norm = np.linalg.norm(a, axis=1)
    lam = -np.einsum("ij,ij->i", a, T)
    with np.errstate(divide="ignore", invalid="ignore"):
        mu = np.where(a_norm > A_ZERO_TOL, -lam / a_norm, np.nan)
    mu = np.clip(mu, -1.0, 1.0)
    one_minus_mu2 = np.clip(1.0 - mu**2, 0.0, None)
    nu = a_norm**4 * one_minus_mu2
    curvature = np.where(np.isnan(mu), 0.0, a_norm * np.sqrt(one_minus_mu2))
    W = C @ params.Pi_R.T
    AC = C @ params.A.T
    exponent = 0.5 * params.alpha * np.einsum("ij,ij->i", C, C) + C @ params.v
    inner = np.einsum("ij,ij->i", T, AC)
    with np.errstate(over="ignore", invalid="ignore"):
        V = np.exp(np.minimum(exponent, EXP_OVERFLOW)) * inner
        V = np.where(exponent > EXP_OVERFLOW, np.sign(inner) * np.inf, V)
        V = np.where((exponent > EXP_OVERFLOW) & (inner == 0.0), 0.0, V)
    return {
        "a_norm": a_norm,
        "lam": lam,
        "mu": mu,
        "nu": nu,
        "curvature": curvature,
        "V": V,
        "delta_total": 0.5 * np.einsum("ij,ij->i", C, C),
        "delta_W": 0.5 * np.einsum("ij,ij->i", W, W),
        "z": C @ params.v,
    }


def lyapunov_rate(params, state) -> float:
    """Exact dV/ds = e^{(alpha/2)|C|^2 + <v,C>} |p_T(A C)|^2 >= 0."""
    C, T = state.C, state.T
    AC = params.A @ C
    proj = AC - (AC @ T) * T
    exponent = 0.5 * params.alpha * (C @ C) + params.v @ C
    return _V_from_parts(exponent, float(proj @ proj))


def V_compact(params, P: np.ndarray, T: np.ndarray) -> float:
    """V extended to the compactified ball; 0 on the boundary when alpha < 0."""
    r2 = float(P @ P)
    if r2 >= 1.0 - 1e-15:
        if params.alpha < 0:
            return 0.0
        raise ValueError("V is unbounded on the boundary for alpha >= 0")
    exponent = 0.5 * params.alpha * r2 / (1.0 - r2)
    inner = float(T @ (params.A @ P)) / np.sqrt(1.0 - r2)
    return _V_from_parts(exponent, inner)


def _nonuniform_d1(f: np.ndarray, s: np.ndarray) -> np.ndarray:
    """First derivative at interior points of a possibly nonuniform grid."""
    hm = s[1:-1] - s[:-2]
    hp = s[2:] - s[1:-1]
    return (hm**2 * f[2:] + (hp**2 - hm**2) * f[1:-1] - hp**2 * f[:-2]) / (
        hm * hp * (hm + hp)
    )


def _nonuniform_d2(f: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Second derivative at interior points of a possibly nonuniform grid."""
    hm = s[1:-1] - s[:-2]
    hp = s[2:] - s[1:-1]
    return 2.0 * (hm * f[2:] - (hm + hp) * f[1:-1] + hp * f[:-2]) / (hm * hp * (hm + hp))


@dataclass(frozen=True)
class ResidualStats:
    max: float
    rms: float
    n_interior: int
    warnings: tuple[str, ...] = ()


def distance_ode_residual(trajectory, B: np.ndarray) -> ResidualStats:
    """Finite-difference residual of delta_ss - lambda delta_s - 2 alpha delta
    = |B C_s|^2 for delta = (1/2)|B C|^2, where B commutes with A and kills v.

    With B = identity and v = 0 the right-hand side is identically 1; with
    B = Pi_R it is the squared range-component of the tangent.
    """
    params = trajectory.params
    B = np.asarray(B, dtype=float)
    scale = max(np.linalg.norm(B), 1.0) * max(np.linalg.norm(params.A), 1.0)
    if np.linalg.norm(B @ params.A - params.A @ B) > 1e-10 * scale:
        raise ValueError("B must commute with A")
    if np.linalg.norm(B @ params.v) > 1e-10 * max(np.linalg.norm(B), 1.0):
        raise ValueError("B must annihilate v")
    s, C, T = trajectory.s, trajectory.C, trajectory.T
    BC = C @ B.T
    BT = T @ B.T
    delta = 0.5 * np.einsum("ij,ij->i", BC, BC)
    rhs = np.einsum("ij,ij->i", BT, BT)
    d1 = _nonuniform_d1(delta, s)
    d2 = _nonuniform_d2(delta, s)
    lam = trajectory.lam[1:-1]
    res = d2 - lam * d1 - 2.0 * params.alpha * delta[1:-1] - rhs[1:-1]
    return ResidualStats(
        max=float(np.max(np.abs(res))),
        rms=float(np.sqrt(np.mean(res**2))),
        n_interior=len(res),
    )


@dataclass(frozen=True)
class ExtremumCount:
    minima: int
    maxima: int
    constant: bool


def count_extrema(values: np.ndarray, band_fraction: float = 1e-7) -> ExtremumCount:
    """Count strict interior extrema with a hysteresis band that suppresses
    round-off oscillation."""
    values = np.asarray(values, dtype=float)
    lo, hi = float(np.min(values)), float(np.max(values))
    band = band_fraction * (hi - lo)
    if hi - lo <= max(band_fraction, 1e-13) * max(abs(hi), abs(lo), 1.0):
        return ExtremumCount(0, 0, True)
    minima = maxima = 0
    direction = 0  # +1 rising, -1 falling
    ref = values[0]
    for x in values[1:]:
        if direction >= 0:
            if x > ref:
                ref = x
                direction = +1
            elif ref - x > band:
                if direction == +1:
                    maxima += 1
                direction = -1
                ref = x
        else:
            if x < ref:
                ref = x
            elif x - ref > band:
                minima += 1
                direction = +1
                ref = x
    return ExtremumCount(minima, maxima, False)


@dataclass(frozen=True)
class MonotonicityReport:
    regime: str
    c_norm: ExtremumCount
    w_norm: ExtremumCount
    z: ExtremumCount
    ends_increasing_c_norm: tuple[bool, bool]
    ends_trend_z: tuple[float, float]
    lambda_residual_max: float | None
    violations: tuple[str, ...]
    notes: tuple[str, ...] = ()


def _end_windows(s: np.ndarray, fraction: float = 0.2) -> tuple[np.ndarray, np.ndarray]:
    span = s[-1] - s[0]
    left = s <= s[0] + fraction * span
    right = s >= s[-1] - fraction * span
    return left, right


def monotonicity_report(trajectory) -> MonotonicityReport:
    """Check the single-minimum and unbounded-end behavior predicted for
    non-shrinking rotating and translating-rotating solitons.

    Report-only: violations are listed, never raised.  For alpha < 0 the
    underlying statements do not apply and the regime is marked accordingly.
    """
    params = trajectory.params
    s = trajectory.s
    c_norm = np.sqrt(2.0 * trajectory.delta_total)
    w_norm = np.sqrt(2.0 * trajectory.delta_W)
    z = trajectory.z
    rotating = len(params.spectrum.planes) > 0
    translating = np.linalg.norm(params.v) > 0

    if params.alpha < 0:
        regime = "shrinking (no single-minimum statement applies)"
    elif translating and rotating:
        regime = "translating-rotating"
    elif translating:
        regime = "translating"
    elif rotating:
        regime = "non-shrinking rotating"
    else:
        regime = "expanding or static"

    ec_c = count_extrema(c_norm)
    ec_w = count_extrema(w_norm)
    ec_z = count_extrema(z) if translating else ExtremumCount(0, 0, True)

    left, right = _end_windows(s)
    # keep the global minimum of |C| out of the end windows so a minimum
    # sitting near an endpoint is not misread as a trend violation
    imin = int(np.argmin(c_norm))
    left_c = left & (np.arange(len(s)) <= imin)
    right_c = right & (np.arange(len(s)) >= imin)
    ends_c = (
        bool(np.sum(left_c) < 2 or np.all(np.diff(c_norm[left_c]) <= 0) or ec_c.constant),
        bool(np.sum(right_c) < 2 or np.all(np.diff(c_norm[right_c]) >= 0) or ec_c.constant),
    )
    if translating:
        zl, zr = z[left], z[right]
        ends_z = (float(zl[0] - zl[-1]), float(zr[-1] - zr[0]))
    else:
        ends_z = (0.0, 0.0)

    lam_res = None
    if params.alpha == 0.0 and len(s) > 4:
        dlam = _nonuniform_d1(trajectory.lam, s)
        lam_res = float(np.max(np.abs(dlam + trajectory.curvature[1:-1] ** 2)))

    violations = []
    if params.alpha >= 0 and rotating and not translating:
        if ec_c.minima > 1 or ec_c.maxima > 0:
            violations.append(
                f"|C| should have at most one minimum and no maxima, "
                f"found {ec_c.minima} minima / {ec_c.maxima} maxima"
            )
        if not ec_c.constant and not (ends_c[0] and ends_c[1]):
            violations.append("|C| is not growing toward both ends")
    if translating and rotating:
        if ec_z.minima > 1:
            violations.append(f"z should have at most one minimum, found {ec_z.minima}")
        if ec_w.minima > 1 and not ec_w.constant:
            violations.append(f"|W| should have at most one minimum, found {ec_w.minima}")

    notes = ()
    if params.alpha < 0:
        notes = ("shrinking regime: extrema counts reported for information only",)
    return MonotonicityReport(
        regime=regime,
        c_norm=ec_c,
        w_norm=ec_w,
        z=ec_z,
        ends_increasing_c_norm=ends_c,
        ends_trend_z=ends_z,
        lambda_residual_max=lam_res,
        violations=tuple(violations),
        notes=notes,
    )


@dataclass(frozen=True)
class ProjectionProfile:
    """Solution Phi_1 of Phi'' = lambda(s) Phi', Phi_1(0) = 0, Phi_1'(0) = 1,
    by quadrature; strictly increasing, so the projection to the rotation
    axis is injective."""

    s: np.ndarray
    phi1: np.ndarray
    phi_minus: float
    phi_plus: float

    def __post_init__(self):
        if not np.all(np.diff(self.phi1) > 0):
            raise ValueError("Phi_1 must be strictly increasing")


def projection_profile(trajectory) -> ProjectionProfile:
    """Compute Phi_1 along the trajectory from its lambda samples."""
    s, lam = trajectory.s, trajectory.lam
    ds = np.diff(s)
    L = np.concatenate([[0.0], np.cumsum(0.5 * (lam[1:] + lam[:-1]) * ds)])
    integrand = np.exp(L)
    phi1 = np.concatenate(
        [[0.0], np.cumsum(0.5 * (integrand[1:] + integrand[:-1]) * ds)]
    )
    phi_plus = phi1[-1] + integrand[-1] / abs(lam[-1]) if lam[-1] < 0 else np.inf
    phi_minus = phi1[0] - integrand[0] / abs(lam[0]) if lam[0] > 0 else -np.inf
    return ProjectionProfile(s=s, phi1=phi1, phi_minus=phi_minus, phi_plus=phi_plus)


@dataclass(frozen=True)
class PlanarityReport:
    singular_values: np.ndarray
    rank: int
    expected_max_rank: int | None
    profile: ProjectionProfile | None
    endpoint_rates: dict


def planarity_check(trajectory, sv_ratio: float = 1e-8) -> PlanarityReport:
    """Numerical rank of the centered null-space component Z of the curve.

    Dilating-rotating and translating-rotating solitons have Z contained in a
    plane (rank <= 2); purely rotating solitons have Z contained in a line
    (rank <= 1), in which case the axis-graph profile Phi_1 is also computed.
    """
    params = trajectory.params
    Z = trajectory.C @ params.Pi_N.T
    Zc = Z - Z.mean(axis=0)
    sv = np.linalg.svd(Zc, compute_uv=False)
    rank = int(np.sum(sv > sv_ratio * sv[0])) if sv.size and sv[0] > 0 else 0

    rotating = len(params.spectrum.planes) > 0
    translating = np.linalg.norm(params.v) > 0
    if not rotating:
        expected = None
    elif params.alpha != 0.0 or translating:
        expected = 2
    else:
        expected = 1

    profile = None
    endpoint_rates: dict = {}
    if rotating and not translating and params.alpha == 0.0:
        profile = projection_profile(trajectory)
        for name, phi in (("minus", profile.phi_minus), ("plus", profile.phi_plus)):
            if np.isfinite(phi):
                # exponential approach rate of Phi_1 to its finite limit
                gap = np.abs(profile.phi1 - phi)
                mask = gap > 1e-14
                if np.sum(mask) >= 10:
                    sl = np.polyfit(trajectory.s[mask], np.log(gap[mask]), 1)[0]
                    endpoint_rates[name] = float(sl)
    return PlanarityReport(
        singular_values=sv,
        rank=rank,
        expected_max_rank=expected,
        profile=profile,
        endpoint_rates=endpoint_rates,
    )
