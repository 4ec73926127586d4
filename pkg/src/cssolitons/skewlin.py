"""Skew-symmetric linear algebra: normal forms, exponentials, projectors.

A real skew matrix A decomposes into invariant 2-planes, on each of which it
acts as rotation at some frequency omega > 0, plus a null space.  All other
modules build on this decomposition: matrix exponentials e^{theta A} and
e^{sigma (alpha + A)} are assembled per plane, pseudoinverses invert per-plane
blocks, and frequency multiplicities define the eigenspaces F_k that carry a
complex structure J_k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np

SKEW_TOL = 1e-12
FREQ_GROUP_RTOL = 1e-9
RESONANCE_MAX_DENOMINATOR = 64


@dataclass(frozen=True)
class PlaneMode:
    """One invariant 2-plane: rotation frequency and orthonormal basis (u, v)
    with A u = omega v and A v = -omega u."""

    omega: float
    u: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class FrequencyBlock:
    """Eigenspace F_k of all planes sharing one distinct frequency Omega_k.

    basis stacks the plane bases as columns; J is the induced complex
    structure Omega_k^{-1} A restricted to F_k, expressed in that basis.
    """

    Omega: float
    basis: np.ndarray
    J: np.ndarray


@dataclass(frozen=True)
class Resonance:
    """Integer-ratio structure of the frequency list, when present."""

    is_resonant: bool
    base_rate: float
    ratios: tuple[int, ...]
    report: str


@dataclass(frozen=True)
class SkewSpectrum:
    """Normal-form data of a skew matrix."""

    n: int
    planes: tuple[PlaneMode, ...]
    null_basis: np.ndarray
    distinct: tuple[FrequencyBlock, ...] = field(default=())
    resonance: Resonance | None = None

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([p.omega for p in self.planes])

    @property
    def matrix(self) -> np.ndarray:
        """Reconstruct the dense skew matrix from its blocks."""
        M = np.zeros((self.n, self.n))
        for p in self.planes:
            M += p.omega * (np.outer(p.v, p.u) - np.outer(p.u, p.v))
        return M

    def null_dim(self) -> int:
        return self.null_basis.shape[1]


def _sign_canonicalize(u: np.ndarray, tol: float = 1e-9) -> float:
    """Return +-1 so that the first significantly nonzero entry of u is positive."""
    scale = np.max(np.abs(u))
    for x in u:
        if abs(x) > tol * scale:
            return 1.0 if x > 0 else -1.0
    return 1.0


def _detect_resonance(omegas: np.ndarray) -> Resonance:
    """Check whether all frequencies are integer multiples of a common rate."""
    if len(omegas) == 0:
        return Resonance(False, 0.0, (), "no rotation frequencies")
    base = omegas[0]
    fracs = []
    for w in omegas:
        f = Fraction(w / base).limit_denominator(RESONANCE_MAX_DENOMINATOR)
        if f.numerator == 0 or abs(w / base - float(f)) > 1e-9 * max(1.0, w / base):
            groups = _incommensurate_groups(omegas)
            report = "incommensurate subsets: " + "; ".join(
                "{" + ", ".join(f"{g:.6g}" for g in grp) + "}" for grp in groups
            )
            return Resonance(False, 0.0, (), report)
        fracs.append(f)
    denom_lcm = 1
    for f in fracs:
        denom_lcm = denom_lcm * f.denominator // gcd(denom_lcm, f.denominator)
    ints = [f.numerator * (denom_lcm // f.denominator) for f in fracs]
    g = 0
    for p in ints:
        g = gcd(g, p)
    ints = [p // g for p in ints]
    rate = base / denom_lcm * g
    report = "resonant: omega_j = " + ", ".join(str(p) for p in ints) + f" x {rate:.6g}"
    return Resonance(True, rate, tuple(ints), report)


def _incommensurate_groups(omegas: np.ndarray) -> list[list[float]]:
    groups: list[list[float]] = []
    for w in omegas:
        for grp in groups:
            r = w / grp[0]
            f = Fraction(r).limit_denominator(RESONANCE_MAX_DENOMINATOR)
            if f.numerator != 0 and abs(r - float(f)) <= 1e-9 * max(1.0, r):
                grp.append(w)
                break
        else:
            groups.append([w])
    return groups


def skew_normal_form(M: np.ndarray) -> SkewSpectrum:
    """Decompose a skew matrix into invariant rotation planes and null space.

    Works through the symmetric eigenproblem of -M^2 (eigenvalues omega^2) and
    pairs eigenvectors within each eigenspace using the action of M itself.
    Plane ordering is deterministic: frequencies ascending, ties broken by
    lexicographic comparison of the sign-canonicalized first basis vectors.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("skew_normal_form requires a square matrix")
    n = M.shape[0]
    scale = np.linalg.norm(M)
    skew_err = np.linalg.norm(M + M.T)
    if skew_err > SKEW_TOL * max(scale, 1.0):
        raise ValueError(f"matrix is not antisymmetric: ||M+M^T|| = {skew_err:.3e}")
    M = 0.5 * (M - M.T)

    evals, evecs = np.linalg.eigh(-M @ M)
    evals = np.clip(evals, 0.0, None)
    tol2 = max(scale, 1.0) ** 2 * 1e-14

    null_cols = [evecs[:, i] for i in range(n) if evals[i] <= tol2]
    pos_idx = [i for i in range(n) if evals[i] > tol2]

    planes: list[PlaneMode] = []
    used = np.zeros((n, 0))
    i = 0
    while i < len(pos_idx):
        # gather the eigenvalue cluster around evals[pos_idx[i]]
        lam = evals[pos_idx[i]]
        cluster = [pos_idx[i]]
        j = i + 1
        while j < len(pos_idx) and abs(evals[pos_idx[j]] - lam) <= 2 * FREQ_GROUP_RTOL * lam:
            cluster.append(pos_idx[j])
            j += 1
        i = j
        space = evecs[:, cluster]
        # peel off planes: u from the remaining space, v = M u / omega
        while space.shape[1] > 0:
            u = space[:, 0]
            u = u / np.linalg.norm(u)
            Mu = M @ u
            omega = np.linalg.norm(Mu)
            v = Mu / omega
            s = _sign_canonicalize(u)
            u, v = s * u, s * v
            planes.append(PlaneMode(omega=omega, u=u, v=v))
            # remove span{u, v} from the cluster space
            P = space - np.outer(u, u @ space) - np.outer(v, v @ space)
            U, sv, _ = np.linalg.svd(P, full_matrices=False)
            space = U[:, sv > 1e-8]

    planes.sort(key=lambda p: (p.omega, tuple(np.round(p.u, 12))))

    if null_cols:
        null_basis = np.column_stack(null_cols)
    else:
        null_basis = np.zeros((n, 0))

    omegas = np.array([p.omega for p in planes])
    distinct: list[FrequencyBlock] = []
    k = 0
    while k < len(planes):
        Om = planes[k].omega
        members = [planes[k]]
        j = k + 1
        while j < len(planes) and abs(planes[j].omega - Om) <= FREQ_GROUP_RTOL * Om:
            members.append(planes[j])
            j += 1
        k = j
        basis = np.column_stack([c for p in members for c in (p.u, p.v)])
        J = basis.T @ (M / Om) @ basis
        distinct.append(FrequencyBlock(Omega=Om, basis=basis, J=J))

    return SkewSpectrum(
        n=n,
        planes=tuple(planes),
        null_basis=null_basis,
        distinct=tuple(distinct),
        resonance=_detect_resonance(omegas),
    )


def rotation_exp(spectrum: SkewSpectrum, theta: float) -> np.ndarray:
    """Assemble e^{theta A} from per-plane cosine/sine rotations."""
    Q = spectrum.null_basis @ spectrum.null_basis.T
    for p in spectrum.planes:
        c, s = np.cos(p.omega * theta), np.sin(p.omega * theta)
        Q += c * (np.outer(p.u, p.u) + np.outer(p.v, p.v))
        Q += s * (np.outer(p.v, p.u) - np.outer(p.u, p.v))
    return Q


def dilate_rotate_exp(alpha: float, spectrum: SkewSpectrum, sigma: float) -> np.ndarray:
    """Return e^{sigma (alpha + A)} = e^{alpha sigma} e^{sigma A}."""
    return np.exp(alpha * sigma) * rotation_exp(spectrum, sigma)


def proj_null(spectrum: SkewSpectrum) -> np.ndarray:
    """Orthogonal projector onto the null space N(A)."""
    return spectrum.null_basis @ spectrum.null_basis.T


def proj_range(spectrum: SkewSpectrum) -> np.ndarray:
    """Orthogonal projector onto the range R(A)."""
    return np.eye(spectrum.n) - proj_null(spectrum)


def pinv(spectrum: SkewSpectrum) -> np.ndarray:
    """Moore-Penrose pseudoinverse, inverting each rotation plane exactly."""
    P = np.zeros((spectrum.n, spectrum.n))
    for p in spectrum.planes:
        P += (1.0 / p.omega) * (np.outer(p.u, p.v) - np.outer(p.v, p.u))
    return P


def normal_form_rotation(spectrum: SkewSpectrum) -> np.ndarray:
    """Orthogonal S whose columns are the plane bases followed by the null
    basis, so S^T A S is in block normal form."""
    cols = [c for p in spectrum.planes for c in (p.u, p.v)]
    if spectrum.null_basis.shape[1] > 0:
        cols.extend(spectrum.null_basis.T)
    return np.column_stack(cols)
