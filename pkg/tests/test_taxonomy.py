import numpy as np
import pytest

from conftest import random_skew
from cssolitons.taxonomy import CanonicalGenerator, GeneratorRaw, apply_conjugation, classify, orbit


def random_raw(rng, n):
    return GeneratorRaw(
        theta=float(rng.standard_normal()),
        v=rng.standard_normal(n),
        w=float(rng.standard_normal()),
        M=random_skew(rng, n),
    )


def test_trivial_rejected():
    with pytest.raises(ValueError):
        classify(GeneratorRaw(theta=0.0, v=np.zeros(3), w=0.0, M=np.zeros((3, 3))))


def test_non_skew_rejected():
    with pytest.raises(ValueError):
        GeneratorRaw(theta=1.0, v=np.zeros(2), w=0.0, M=np.eye(2))


def test_categories():
    n = 3
    M = random_skew(np.random.default_rng(0), n)
    # static symmetry: theta = 0, w = 0
    can = classify(GeneratorRaw(theta=0.0, v=np.zeros(n), w=0.0, M=M))
    assert can.category == "A"
    # time translation present, no dilation
    can = classify(GeneratorRaw(theta=0.0, v=np.zeros(n), w=2.0, M=M))
    assert can.category == "B"
    assert can.w == 1.0  # parabolic dilation normalizes w to 1
    # dilation present
    can = classify(GeneratorRaw(theta=-0.7, v=np.zeros(n), w=0.0, M=M))
    assert can.category == "C"
    assert can.theta == 1.0


def test_normalization_invariants(rng):
    for _ in range(30):
        n = int(rng.integers(2, 6))
        raw = random_raw(rng, n)
        can = classify(raw)
        assert can.category in ("A", "B", "C")
        assert can.theta in (0.0, 1.0)
        if can.category == "C":
            assert can.theta == 1.0
            assert can.w == 0.0
            assert np.linalg.norm(can.v_hat) < 1e-10
        if can.category == "B":
            assert can.theta == 0.0
            assert can.w == 1.0
            # v_hat lies in the null space of M
            assert np.linalg.norm(can.M @ can.v_hat) < 1e-9
        if can.category == "A":
            assert can.theta == 0.0
            assert can.w == 0.0


def test_conjugation_roundtrip(rng):
    for _ in range(50):
        n = int(rng.integers(2, 6))
        raw = random_raw(rng, n)
        can = classify(raw)
        rec = apply_conjugation(can)
        sign = can.conjugation.sign
        scale = max(abs(raw.theta), np.linalg.norm(raw.v), abs(raw.w), np.linalg.norm(raw.M))
        assert abs(rec.theta - sign * raw.theta) < 1e-8 * scale
        assert abs(rec.w - sign * raw.w) < 1e-8 * scale
        assert np.linalg.norm(rec.v - sign * raw.v) < 1e-7 * scale
        assert np.linalg.norm(rec.M - sign * raw.M) < 1e-8 * scale


def test_orbit_group_law(rng):
    n = 3
    for _ in range(5):
        can = classify(random_raw(rng, n))
        x0 = rng.standard_normal(n)
        t0 = float(rng.standard_normal())
        a, b = 0.3, -0.8
        x1, t1 = orbit(can, a + b, x0, t0)
        xb, tb = orbit(can, b, x0, t0)
        x2, t2 = orbit(can, a, xb, tb)
        assert np.linalg.norm(x1 - x2) < 1e-12 * max(np.linalg.norm(x1), 1.0)
        assert abs(t1 - t2) < 1e-12 * max(abs(t1), 1.0)


def test_sign_flip_rule():
    M = np.zeros((2, 2))
    v = np.array([1.0, 0.0])
    can = classify(GeneratorRaw(theta=0.0, v=v, w=-2.0, M=M))
    assert can.conjugation.sign == -1.0
    assert can.w == 1.0
    can = classify(GeneratorRaw(theta=-1.0, v=np.zeros(2), w=0.0, M=M))
    assert can.conjugation.sign == -1.0
    assert can.theta == 1.0
