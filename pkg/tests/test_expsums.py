import cmath
import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from diag_arcs.errors import InputError, PreconditionError
from diag_arcs.expsums import (
    PolyPhase,
    complete_sum,
    complete_sum_bound_check,
    complete_sum_system,
    complete_sum_system_direct,
    f_135,
    poly_phase_sum,
    psi,
    psi_star,
    system_weyl_sum,
    system_weyl_sum_direct,
    vdc_ratio,
    weyl_sum,
)
from diag_arcs.forms import ExponentTuple, validate_system

K1 = ExponentTuple((1,))
K2 = ExponentTuple((2,))
K135 = ExponentTuple((1, 3, 5))


def test_weyl_sum_examples():
    assert weyl_sum(K135, [0.0, 0.0, 0.0], 7) == pytest.approx(15.0)
    v = weyl_sum(K1, [0.5], 2)
    assert v == pytest.approx(1.0, abs=1e-12)


def test_weyl_sum_odd_exponents_real():
    rng = np.random.Generator(np.random.Philox(key=5))
    for _ in range(10):
        alpha = rng.uniform(-2, 2, size=3)
        X = int(rng.integers(5, 60))
        v = weyl_sum(K135, list(alpha), X)
        assert abs(v.imag) <= 1e-9 * (2 * X + 1)


def test_weyl_sum_conjugation():
    rng = np.random.Generator(np.random.Philox(key=6))
    k = ExponentTuple((1, 2, 4))
    for _ in range(10):
        alpha = list(rng.uniform(-1, 1, size=3))
        X = int(rng.integers(3, 40))
        a = weyl_sum(k, alpha, X)
        b = weyl_sum(k, [-x for x in alpha], X)
        assert a.conjugate() == pytest.approx(b, rel=1e-12, abs=1e-12)


def test_weyl_sum_huge_phase_is_exactly_reduced():
    # x^5 ~ 3.2e16 exceeds the float mantissa; the dyadic reduction keeps
    # the symmetric pairing exact, so the sum of an odd phase stays real.
    v = weyl_sum(ExponentTuple((5,)), [0.123456789], 2000)
    assert abs(v.imag) <= 1e-9 * 4001


def test_poly_phase_sum_examples():
    zero = PolyPhase.dense([0.0, 0.0])
    assert poly_phase_sum(zero, (-6, 6)) == pytest.approx(13.0)
    half = PolyPhase.dense([0.5])
    assert poly_phase_sum(half, (1, 2)) == pytest.approx(0.0, abs=1e-12)
    g5 = PolyPhase.missing_degree(5, [0.0, 0.0, 0.0], 0.0)
    assert g5.degree == 5
    assert poly_phase_sum(g5, (-4, 4)) == pytest.approx(9.0)


def test_poly_phase_validation():
    with pytest.raises(InputError):
        PolyPhase.sparse([(1, 0.5), (1, 0.25)])
    with pytest.raises(InputError):
        PolyPhase.sparse([(0, 0.5)])
    with pytest.raises(InputError):
        PolyPhase.missing_degree(2, [], 0.1)


def test_complete_sum_examples():
    assert complete_sum(K2, 1, [0]) == pytest.approx(1.0)
    s = complete_sum(K2, 4, [1])
    assert s == pytest.approx(2 + 2j, abs=1e-12)
    assert complete_sum(K1, 3, [1]) == pytest.approx(0.0, abs=1e-12)


def test_complete_sum_periodicity():
    rng = np.random.Generator(np.random.Philox(key=8))
    k = ExponentTuple((1, 3))
    for _ in range(10):
        q = int(rng.integers(2, 30))
        a = [int(rng.integers(1, q + 1)) for _ in range(2)]
        s0 = complete_sum(k, q, a)
        s1 = complete_sum(k, q, [a[0] + q, a[1]])
        s2 = complete_sum(k, q, [a[0], a[1] - 3 * q])
        assert s0 == pytest.approx(s1, rel=1e-12, abs=1e-12)
        assert s0 == pytest.approx(s2, rel=1e-12, abs=1e-12)


def test_complete_sum_system_examples(eq_squares):
    assert complete_sum_system(eq_squares, 1, [0]) == pytest.approx(1.0)
    s = complete_sum_system(eq_squares, 4, [1])
    assert s == pytest.approx(8.0, abs=1e-10)


def test_complete_sum_system_matches_direct():
    rng = np.random.Generator(np.random.Philox(key=9))
    for _ in range(6):
        F = validate_system(
            {
                "k": [1, 2],
                "u": [
                    [int(x) for x in rng.choice([-2, -1, 1, 2], size=3)],
                    [int(x) for x in rng.choice([-2, -1, 1, 2], size=3)],
                ],
            }
        )
        q = int(rng.integers(2, 13))
        a = [int(rng.integers(1, q + 1)) for _ in range(2)]
        prod = complete_sum_system(F, q, a)
        direct = complete_sum_system_direct(F, q, a)
        assert prod == pytest.approx(direct, rel=1e-9, abs=1e-9)


def test_system_weyl_sum(eq_squares):
    assert system_weyl_sum(eq_squares, [0.0], 4) == pytest.approx(81.0)
    beta = 0.37
    v = system_weyl_sum(eq_squares, [beta], 9)
    w = weyl_sum(K2, [beta], 9)
    assert v == pytest.approx(abs(w) ** 2, rel=1e-12)


def test_system_weyl_sum_matches_direct():
    rng = np.random.Generator(np.random.Philox(key=10))
    F = validate_system({"k": [1, 3], "u": [[1, -2], [2, 1]]})
    for _ in range(4):
        alpha = list(rng.uniform(-0.5, 0.5, size=2))
        v = system_weyl_sum(F, alpha, 5)
        d = system_weyl_sum_direct(F, alpha, 5)
        assert v == pytest.approx(d, rel=1e-9, abs=1e-9)


def test_complete_sum_bound_check_fixed_points():
    # |S| = 2*sqrt(2) at (k, q, a) = ((2), 4, (1)); denominator 4^{0.6}
    s = abs(complete_sum(K2, 4, [1]))
    assert s == pytest.approx(2 * math.sqrt(2))
    ratio = s / 4 ** (1 - 1 / 2 + 0.1)
    assert ratio == pytest.approx(1.2311444133449165, rel=1e-12)
    # q = 1: |S| = 1 over 1
    assert abs(complete_sum(K2, 1, [1])) == pytest.approx(1.0)
    # linear phase at a prime vanishes
    assert abs(complete_sum(K1, 7, [1])) == pytest.approx(0.0, abs=1e-12)


def test_complete_sum_bound_sweep():
    rep = complete_sum_bound_check(K2, list(range(1, 41)), trials=4, seed=0)
    assert rep.ok
    assert np.isfinite(rep.max_ratio)
    with pytest.raises(InputError):
        complete_sum_bound_check(K2, [], trials=2)
    with pytest.raises(InputError):
        complete_sum_bound_check(K2, [4], trials=2, eps=-1.0)


def test_psi_examples():
    assert psi(5, 0.0, 0.5, 10) == pytest.approx(2.0)
    assert psi(3, 0.0, 0.5, 10) == pytest.approx(2.0)
    assert psi(5, 0.0, 0.0, 10) == pytest.approx(10.0**4)
    v1 = psi(5, 1 / math.sqrt(2), 0.0, 100)
    v2 = psi(5, 1 / math.sqrt(2), 0.0, 100)
    assert v1 == v2  # deterministic re-evaluation


def test_psi_star_lower_bound_property():
    theta = 1 / math.sqrt(2)
    X = 50
    star = psi_star(5, theta, X, grid_size=64)
    for mu in np.arange(64) / 64:
        assert psi(5, theta, float(mu), X) <= star + 1e-12


def test_vdc_ratio():
    X = 100
    assert vdc_ratio([0.0, 0.0, 0.0], X) == pytest.approx((2 * X + 1) / X)
    thr = X ** (-10.0 / 3.0)
    vdc_ratio([0.2, 0.9, thr], X)  # boundary is admissible
    with pytest.raises(PreconditionError, match="admissible"):
        vdc_ratio([0.0, 0.0, 2 * thr], X)
    assert f_135([0.0, 0.0, 0.0], 3) == pytest.approx(7.0)
