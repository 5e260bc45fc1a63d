from fractions import Fraction

import numpy as np
import pytest

from diag_arcs.arcs import arc_params, classify
from diag_arcs.regions import (
    K135,
    in_L,
    in_W2,
    in_W3,
    in_m2,
    in_m3,
    region_135,
)


def test_m3_vacuous_at_desk_scale():
    # X^{1/8}/5 < 1 for X < 5^8, so the quantifier is empty
    for X in (256, 1024):
        for a3 in (0.3, 0.5, Fraction(1, 3)):
            assert in_m3(a3, X)


def test_W3_center_example():
    # first X where q3 = 1 becomes admissible: alpha_3 = 1/1 is a W3 center
    X = 5**8
    assert not in_m3(Fraction(1), X)
    assert in_W3(Fraction(1), X)
    # far from any admissible fraction
    assert in_m3(Fraction(1, 3) + Fraction(1, 997), X)


def test_m2_W2_duality_examples():
    X = 256
    # 61/200 has no Dirichlet-quality approximation with q <= 64
    assert in_m2(Fraction(61, 200), X)
    assert not in_W2(Fraction(61, 200), X)
    # a low-denominator rational is a W2 center and not in m2
    assert not in_m2(Fraction(1, 3), X)
    assert in_W2(Fraction(1, 3), X)


def test_complement_inclusions_random():
    rng = np.random.Generator(np.random.Philox(key=40))
    for X in (256, 1024):
        lo = 1.0 / (2 * int(X**0.625))
        for _ in range(400):
            a = float(rng.uniform(lo, 1 + lo))
            if not in_m3(a, X):
                assert in_W3(a, X)
            if not in_m2(a, X):
                assert in_W2(a, X)


def test_minor_cover_random():
    rng = np.random.Generator(np.random.Philox(key=41))
    for X in (256, 1024):
        lo = 1.0 / (2 * int(X**0.625))
        for _ in range(150):
            alpha = [float(x) for x in rng.uniform(lo, 1 + lo, size=3)]
            f = region_135(alpha, X, [1, 2, 3], include_L=False)
            if f.is_minor:
                assert f.in_n1 or f.in_n2 or f.in_n3


def test_major_arcs_inside_pruning_union():
    import math

    X = 256
    w = [1, 1, 1]
    params = arc_params(X, "5/8", K135)
    rng = np.random.Generator(np.random.Philox(key=42))
    checked = 0
    for q in (1, 2, 3, 5, 8):
        for _ in range(4):
            a = [int(rng.integers(1, q + 1)) for _ in range(3)]
            if math.gcd(q, *a) != 1:
                continue
            # a point inside M(q, a): offset each coordinate by half its
            # own arc radius Q/(q X^{k_i}), capped by the box margin
            alpha = [
                Fraction(ai, q)
                + min(Fraction(params.Q, 2 * q * X**ki), Fraction(1, 2 * params.Q0))
                for ai, ki in zip(a, K135.k)
            ]
            label = classify(params, K135, alpha)
            assert label.is_major
            member, lq, la = in_L(alpha, X, w)
            assert member, (q, a)
            checked += 1
    assert checked >= 5


def test_region_flags_shape():
    f = region_135([0.3, 0.305, 0.77], 256, [1, 1, 1])
    assert f.is_minor
    assert f.in_m3 and not f.in_W3
    assert f.in_m2 and not f.in_W2
    assert f.in_n3  # m3 holds vacuously, so every minor point lands in n3
    assert not f.in_L and f.L_q is None
    with pytest.raises(Exception):
        region_135([0.3, 0.305], 256, [1, 1, 1])
