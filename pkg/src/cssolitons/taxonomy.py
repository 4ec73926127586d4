"""Classification of one-parameter symmetry subgroup generators.

A generator acts on space-time as x -> e^{eps theta} e^{eps M} x + (terms
from v), t -> e^{2 eps theta} t + (terms from w).  Every nontrivial generator
is conjugate, by a rotation, a space shift, a time shift, a parabolic
dilation, and a positive rescale, to one of three canonical categories:

  A: theta = 0, w = 0   (static symmetry: rotation, possibly with a
                          translation along the rotation axis)
  B: theta = 0, w = 1   (translating-rotating)
  C: theta = 1, w = 0   (dilating-rotating)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .skewlin import (
    SkewSpectrum,
    normal_form_rotation,
    pinv,
    proj_null,
    rotation_exp,
    skew_normal_form,
)


@dataclass(frozen=True)
class GeneratorRaw:
    """An arbitrary generator: dilation rate theta, translation v, time
    translation rate w, rotation generator M."""

    theta: float
    v: np.ndarray
    w: float
    M: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        M = np.asarray(self.M, dtype=float)
        if np.linalg.norm(M + M.T) > 1e-12 * max(np.linalg.norm(M), 1.0):
            raise ValueError("M must be antisymmetric")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "M", 0.5 * (M - M.T))

    def is_trivial(self) -> bool:
        return (
            self.theta == 0.0
            and self.w == 0.0
            and np.linalg.norm(self.v) == 0.0
            and np.linalg.norm(self.M) == 0.0
        )


@dataclass(frozen=True)
class Conjugation:
    """Coordinate change (x, t) = (lam S x_hat + p, lam^2 t_hat + vartheta)
    together with the rescale rho and sign flip applied to the generator."""

    rotation: np.ndarray
    space_shift: np.ndarray
    time_shift: float
    dilation: float
    rescale: float
    sign: float


@dataclass(frozen=True)
class CanonicalGenerator:
    category: str  # "A", "B" or "C"
    theta: float
    v_hat: np.ndarray
    w: float
    spectrum: SkewSpectrum
    conjugation: Conjugation

    @property
    def M(self) -> np.ndarray:
        return self.spectrum.matrix


def classify(raw: GeneratorRaw) -> CanonicalGenerator:
    """Normalize a generator to canonical form, recording the conjugation.

    Steps, in order: sign choice making w >= 0 (theta < 0 with w = 0 is also
    flipped, so dilating generators expand forward); rotation to skew normal
    form; space shift p = -(theta + M)^{-1} v when theta != 0, else
    p = -M^+ v leaving v_hat = Pi_N v; time shift vartheta = -w/(2 theta)
    when theta != 0; parabolic dilation scaling w to 1 when theta = 0, w > 0;
    rescale of the whole generator so theta lands in {0, 1}.
    """
    if raw.is_trivial():
        raise ValueError("trivial subgroup: all generator components vanish")

    sign = 1.0
    if raw.w < 0 or (raw.w == 0 and raw.theta < 0):
        sign = -1.0
    theta = sign * raw.theta
    v = sign * raw.v
    w = sign * raw.w
    M = sign * raw.M

    spectrum_raw = skew_normal_form(M)
    S = normal_form_rotation(spectrum_raw)

    if theta != 0.0:
        p = -np.linalg.solve(theta * np.eye(len(v)) + M, v)
        vartheta = -w / (2.0 * theta)
        v_shifted = np.zeros_like(v)
        w_shifted = 0.0
    else:
        p = -(pinv(spectrum_raw) @ v)
        vartheta = 0.0
        v_shifted = proj_null(spectrum_raw) @ v
        w_shifted = w

    lam = 1.0
    if theta == 0.0 and w_shifted > 0.0:
        # parabolic dilation (x, t) -> (lam x, lam^2 t) scales w by lam^2
        lam = np.sqrt(w_shifted)
        w_shifted = 1.0
    rho = theta if theta != 0.0 else 1.0
    theta_c = theta / rho
    M_c = S.T @ (M / rho) @ S
    v_c = S.T @ v_shifted / (lam * rho)
    w_c = w_shifted / rho

    if theta_c == 1.0:
        category = "C"
    elif w_c == 1.0:
        category = "B"
    else:
        category = "A"

    return CanonicalGenerator(
        category=category,
        theta=theta_c,
        v_hat=v_c,
        w=w_c,
        spectrum=skew_normal_form(M_c),
        conjugation=Conjugation(
            rotation=S,
            space_shift=p,
            time_shift=vartheta,
            dilation=lam,
            rescale=rho,
            sign=sign,
        ),
    )


def apply_conjugation(canonical: CanonicalGenerator) -> GeneratorRaw:
    """Push the canonical generator back through its recorded conjugation,
    recovering sign * raw (a positive multiple of the raw generator when the
    sign choice was +1)."""
    c = canonical.conjugation
    S, p, vartheta, lam, rho = c.rotation, c.space_shift, c.time_shift, c.dilation, c.rescale
    M_tilde = S @ canonical.M @ S.T
    theta = rho * canonical.theta
    M = rho * M_tilde
    v = rho * (lam * (S @ canonical.v_hat) - (canonical.theta * np.eye(len(p)) + M_tilde) @ p)
    w = rho * (lam**2 * canonical.w - 2.0 * canonical.theta * vartheta)
    return GeneratorRaw(theta=theta, v=v, w=w, M=M)


def orbit(
    canonical: CanonicalGenerator, eps: float, x0: np.ndarray, t0: float
) -> tuple[np.ndarray, float]:
    """Act by the canonical one-parameter subgroup at parameter eps."""
    x0 = np.asarray(x0, dtype=float)
    Q = rotation_exp(canonical.spectrum, eps)
    if canonical.category == "C":
        return np.exp(eps) * (Q @ x0), np.exp(2.0 * eps) * t0
    x = Q @ x0 + eps * canonical.v_hat
    t = t0 + eps if canonical.category == "B" else t0
    return x, t
