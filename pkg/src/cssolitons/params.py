"""Parameter and state types for the soliton flow on R^n x S^{n-1}."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .skewlin import SkewSpectrum, proj_null, proj_range, skew_normal_form


@dataclass(frozen=True)
class SolitonParams:
    """The triple (alpha, A, v) defining one soliton profile equation.

    Constraints enforced at construction: A v = 0, and v = 0 whenever
    alpha != 0 (a dilating generator can always be conjugated to remove the
    translation part, so mixed alpha/v input indicates a non-normalized
    generator).
    """

    alpha: float
    spectrum: SkewSpectrum
    v: np.ndarray
    A: np.ndarray = field(init=False, repr=False)
    Pi_N: np.ndarray = field(init=False, repr=False)
    Pi_R: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        if v.shape != (self.spectrum.n,):
            raise ValueError("v has wrong dimension")
        A = self.spectrum.matrix
        scale = max(np.linalg.norm(A), 1.0) * max(np.linalg.norm(v), 1.0)
        if np.linalg.norm(A @ v) > 1e-12 * scale:
            raise ValueError("v must lie in the null space of A (A v = 0)")
        if self.alpha != 0.0 and np.linalg.norm(v) > 0.0:
            raise ValueError(
                "alpha != 0 requires v = 0: a dilating one-parameter subgroup "
                "is conjugate to one with no translation part"
            )
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "Pi_N", proj_null(self.spectrum))
        object.__setattr__(self, "Pi_R", proj_range(self.spectrum))

    @property
    def n(self) -> int:
        return self.spectrum.n

    def drive(self, C: np.ndarray) -> np.ndarray:
        """The drive vector a = (alpha + A) C + v."""
        return self.alpha * C + self.A @ C + self.v


def params_from_matrix(alpha: float, A: np.ndarray, v: np.ndarray) -> SolitonParams:
    """Build SolitonParams from a dense skew matrix."""
    return SolitonParams(alpha=alpha, spectrum=skew_normal_form(A), v=np.asarray(v, float))


@dataclass(frozen=True)
class PhaseState:
    """A point (C, T) of the flow: position and unit tangent."""

    C: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        C = np.asarray(self.C, dtype=float)
        T = np.asarray(self.T, dtype=float)
        if C.shape != T.shape:
            raise ValueError("C and T must have the same dimension")
        if abs(np.linalg.norm(T) - 1.0) > 1e-12:
            raise ValueError("T must be a unit vector")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "T", T)


@dataclass(frozen=True)
class CompactState:
    """Compactified state: P = C / sqrt(1 + |C|^2) in the closed unit ball."""

    P: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        T = np.asarray(self.T, dtype=float)
        if np.linalg.norm(P) > 1.0 + 1e-12:
            raise ValueError("P must lie in the closed unit ball")
        if abs(np.linalg.norm(T) - 1.0) > 1e-12:
            raise ValueError("T must be a unit vector")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "T", T)


def compactify(state: PhaseState) -> CompactState:
    """Map (C, T) to (P, T) with P = C / sqrt(1 + |C|^2)."""
    C = state.C
    return CompactState(P=C / np.sqrt(1.0 + C @ C), T=state.T)


def decompactify(state: CompactState) -> PhaseState:
    """Inverse of compactify; requires an interior point |P| < 1."""
    P = state.P
    r2 = P @ P
    if r2 >= 1.0:
        raise ValueError("boundary points have no finite preimage")
    return PhaseState(C=P / np.sqrt(1.0 - r2), T=state.T)
