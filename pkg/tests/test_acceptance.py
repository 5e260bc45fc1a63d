"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as they
complete. Every tolerance is pinned here, not configurable.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from diag_arcs.arcs import weyl_major_error
from diag_arcs.cli import main as cli_main
from diag_arcs.counting import (
    MomentSpec,
    count_zeros_brute,
    count_zeros_mim,
    moment_count,
    vinogradov_count,
)
from diag_arcs.expsums import vdc_ratio
from diag_arcs.forms import ExponentTuple, validate_system
from diag_arcs.oscillatory import (
    singular_integral_smoothed,
    singular_integral_truncated,
)
from diag_arcs.regions import in_W2, in_W3, in_m2, in_m3, region_135
from diag_arcs.series import T_q, count_mod, euler_identity_check, hensel_lift, padic_search
from diag_arcs.series import series_truncated
from conftest import corpus_system


def report(num, ok, desc, t0):
    line = f"ACCEPTANCE {num:02d} {'PASS' if ok else 'FAIL'} {desc} [{time.time() - t0:.1f}s]"
    print(line)
    assert ok, line


def random_small_system(rng, trial):
    n = int(rng.integers(1, 3))
    s = int(rng.integers(2, 5))
    while True:
        ks = sorted(set(int(rng.integers(1, 5)) for _ in range(n)))
        if len(ks) == n:
            break
    u = [
        [int(x) for x in rng.choice([-3, -2, -1, 1, 2, 3], size=s)]
        for _ in range(n)
    ]
    return validate_system({"name": f"rand{trial}", "k": ks, "u": u})


def test_criterion_01_exactness_cross_checks():
    t0 = time.time()
    rng = np.random.Generator(np.random.Philox(key=101))
    ok = True
    for trial in range(50):
        F = random_small_system(rng, trial)
        X = int(rng.integers(1, 21))
        if F.n == 1 and F.s <= 2:
            X = min(X, 20)
        cb = count_zeros_brute(F, X).count
        cm = count_zeros_mim(F, X).count
        if cb != cm:
            ok = False
            break
    elapsed_ok = time.time() - t0 < 120
    report(1, ok and elapsed_ok, "count_zeros_mim == count_zeros_brute on 50 random systems", t0)


def test_criterion_02_moment_identity():
    t0 = time.time()
    ok = True
    for b in (1, 2, 3):
        for k_max in (1, 2, 3):
            spec = MomentSpec(b, ExponentTuple(tuple(range(1, k_max + 1))), "positive")
            for X in range(1, 31):
                if moment_count(spec, X) != vinogradov_count(b, k_max, X):
                    ok = False
    elapsed_ok = time.time() - t0 < 300
    report(2, ok and elapsed_ok, "moment_count == vinogradov_count, b<=3, k<=3, X<=30", t0)


def test_criterion_03_closed_form_anchors(eq_squares):
    t0 = time.time()
    ok = all(vinogradov_count(1, k, X) == X for k in (1, 2, 3) for X in (1, 5, 12, 30))
    ok = ok and vinogradov_count(2, 1, 3) == 19
    ok = ok and all(
        count_zeros_brute(eq_squares, X).count == 4 * X + 1 for X in range(0, 51)
    )
    report(3, ok, "J_{1,k}(X)=X, J_{2,1}(3)=19, N(eq_squares)(X)=4X+1 for X<=50", t0)


def test_criterion_04_finite_euler_identity(eq_squares, sq4, lin3, k12_s6, toy127):
    t0 = time.time()
    corpus = [eq_squares, sq4, lin3, k12_s6, toy127]
    ok = True
    for F in corpus:
        for p in (2, 3, 5, 7):
            for H in (1, 2, 3):
                if not euler_identity_check(F, p, H, rel_tol=1e-8):
                    ok = False
                    print(f"  euler identity failed: {F.name} p={p} H={H}")
    elapsed_ok = time.time() - t0 < 300
    report(4, ok and elapsed_ok, "sum_h T(p^h) = p^{H(n-s)} M(p^H), p in {2,3,5,7}, H<=3", t0)


def _coprime_pairs(limit_product, count):
    pairs = []
    for prod in range(6, limit_product + 1):
        for q1 in range(2, int(math.isqrt(prod)) + 1):
            if prod % q1 == 0:
                q2 = prod // q1
                if q1 < q2 and math.gcd(q1, q2) == 1:
                    pairs.append((q1, q2))
                    if len(pairs) == count:
                        return pairs
    return pairs


def test_criterion_05_multiplicativity(eq_squares, sq4, k12_s6, toy127):
    t0 = time.time()
    corpus = [eq_squares, sq4, k12_s6, toy127]
    pairs = _coprime_pairs(500, 100)
    assert len(pairs) == 100
    ok = True
    for i, (q1, q2) in enumerate(pairs):
        F = corpus[i % len(corpus)]
        lhs = T_q(F, q1 * q2)
        rhs = T_q(F, q1) * T_q(F, q2)
        if abs(lhs - rhs) > 1e-9 * max(1.0, abs(rhs)):
            ok = False
            print(f"  multiplicativity failed: {F.name} ({q1},{q2})")
    elapsed_ok = time.time() - t0 < 120
    report(5, ok and elapsed_ok, "T(q1 q2) == T(q1) T(q2) on 100 coprime pairs, q1q2<=500", t0)


def test_criterion_06_hensel_postconditions(eq_squares, sq4, lin3, k12_s6, toy127):
    t0 = time.time()
    corpus = [eq_squares, sq4, lin3, k12_s6, toy127]
    ok = True
    total = 0
    for F in corpus:
        for p in (2, 3, 5, 7, 11, 13):
            cert = padic_search(F, p)
            if cert is None:
                ok = False
                print(f"  no certificate: {F.name} p={p}")
                continue
            total += 1
            H = cert.u_p + 3
            lift = hensel_lift(F, p, cert.solution, cert.minor_columns, H)
            vals = F.evaluate(list(lift))
            if not all(v % p**H == 0 for v in vals):
                ok = False
                print(f"  lift not a solution mod p^H: {F.name} p={p}")
            if not all(
                (a - b) % p ** (cert.v_p + 1) == 0
                for a, b in zip(lift, cert.solution)
            ):
                ok = False
                print(f"  seed congruence broken: {F.name} p={p}")
    report(6, ok and total == 30, f"Hensel postconditions verified on {total}/30 corpus certificates", t0)


def test_criterion_07_singular_integral_two_routes(lin2, lin3, sq4, k12_s6):
    t0 = time.time()
    anchor = singular_integral_truncated(lin2, 1000.0, tol=1e-5)
    ok = abs(anchor.value - 2.0) <= 1e-3
    for system, U, T, samples in (
        (lin3, 64.0, 32.0, 2 * 10**6),
        (sq4, 32.0, 16.0, 2 * 10**6),
        (k12_s6, 8.0, 16.0, 2 * 10**6),
    ):
        tr = singular_integral_truncated(system, U, tol=1e-4)
        mc = singular_integral_smoothed(system, T, samples, seed=0)
        if abs(tr.value - mc.value) > tr.error_bar() + mc.error_bar():
            ok = False
            print(f"  routes disagree on {system.name}")
    elapsed_ok = time.time() - t0 < 600
    report(7, ok and elapsed_ok, "two singular-integral routes agree; J(x1-x2)=2 within 1e-3 at U=1e3", t0)


def test_criterion_08_end_to_end_asymptotic(toy127):
    t0 = time.time()
    from diag_arcs.oscillatory import real_nonsingular_search
    from diag_arcs.series import padic_sweep

    cert = real_nonsingular_search(toy127, attempts=100, seed=0)
    sweep = padic_sweep(toy127, p_max=100, seed=0)
    certified = cert is not None and all(c is not None for c in sweep.values())

    J = singular_integral_truncated(toy127, 8.0, tol=1e-4)
    S = series_truncated(toy127, 64)
    ok = certified
    for X in (16, 24):
        tX = time.time()
        N = count_zeros_mim(toy127, X).count
        pred = J.value * S.partial_sum * X**4
        ratio = N / pred
        print(f"  X={X}: N={N} prediction={pred:.1f} ratio={ratio:.4f}")
        if not 0.8 <= ratio <= 1.2:
            ok = False
        if time.time() - tX > 900:
            ok = False
    report(8, ok, "N_F(X) / (J S X^4) in [0.8, 1.2] for the certified s=7 system", t0)


def test_criterion_09_theorem3_error_sweep():
    t0 = time.time()
    rng = np.random.Generator(np.random.Philox(key=109))
    rows = []
    for k in (2, 3):
        for X in range(100, 1001, 100):
            for _ in range(20):
                q = int(rng.integers(1, 101))
                a = [int(rng.integers(0, q + 1)) for _ in range(k)]
                beta = _theorem3_beta(rng, k, q, X)
                rep = weyl_major_error(k, q, a, beta, X)
                rows.append((X, rep.error / rep.budget))
    rows.sort(key=lambda r: r[0])
    half = len(rows) // 2
    first = max(r[1] for r in rows[:half])
    second = max(r[1] for r in rows[half:])
    ok = np.isfinite(second) and second <= 2 * first
    elapsed_ok = time.time() - t0 < 600
    report(9, ok and elapsed_ok,
           f"Theorem-3 error/budget stability (first {first:.3f}, second {second:.3f})", t0)


def _theorem3_beta(rng, k_deg, q, X):
    beta = [0.0] * k_deg
    beta[0] = float(rng.uniform(-1, 1)) / (2 * q) * 0.9
    if k_deg > 1:
        shares = rng.dirichlet([1.0] * (k_deg - 1)) * 0.9
        for j in range(2, k_deg + 1):
            cap = shares[j - 2] / (4 * q * j * float(X) ** (j - 1))
            beta[j - 1] = float(rng.uniform(-cap, cap))
    return beta


def test_criterion_10_vdc_ratio_sweep():
    t0 = time.time()
    rng = np.random.Generator(np.random.Philox(key=110))
    rows = []
    for _ in range(1000):
        X = int(rng.integers(100, 2001))
        a3 = float(rng.uniform(-1, 1)) * float(X) ** (-10.0 / 3.0)
        alpha = [float(rng.uniform(0, 1)), float(rng.uniform(0, 1)), a3]
        rows.append((X, vdc_ratio(alpha, X)))
    rows.sort(key=lambda r: r[0])
    half = len(rows) // 2
    first = max(r[1] for r in rows[:half])
    second = max(r[1] for r in rows[half:])
    ok = all(np.isfinite(r[1]) for r in rows) and second <= 2 * first
    elapsed_ok = time.time() - t0 < 300
    report(10, ok and elapsed_ok,
           f"vdc ratio sweep finite and stable (first {first:.3f}, second {second:.3f})", t0)


def test_criterion_11_region_properties():
    t0 = time.time()
    rng = np.random.Generator(np.random.Philox(key=111))
    violations = 0
    for X in (256, 1024):
        lo = 1.0 / (2 * int(X**0.625))
        for _ in range(10000):
            alpha = [float(x) for x in rng.uniform(lo, 1 + lo, size=3)]
            a2, a3 = alpha[1], alpha[2]
            if (not in_m3(a3, X)) and (not in_W3(a3, X)):
                violations += 1
            if (not in_m2(a2, X)) and (not in_W2(a2, X)):
                violations += 1
            f = region_135(alpha, X, [1, 2, 3], include_L=False)
            if f.is_minor and not (f.in_n1 or f.in_n2 or f.in_n3):
                violations += 1
    report(11, violations == 0,
           f"region inclusions and minor cover, 10^4 points per X ({violations} violations)", t0)


def test_criterion_12_determinism(capsys):
    t0 = time.time()
    configs = [
        ["count", "--system", "corpus:toy_1_2_7", "--X", "5", "--method", "mim",
         "--no-timing"],
        ["sint", "--system", "corpus:lin3", "--U", "8", "--T", "8",
         "--mc-samples", "200000", "--no-timing"],
        ["vmvt", "--b", "2", "--k-max", "2", "--X", "3,5,7", "--no-timing"],
    ]
    ok = True
    for argv in configs:
        outputs = []
        for threads in ("1", "4", "8"):
            code = cli_main(argv + ["--threads", threads, "--seed", "0"])
            captured = capsys.readouterr()
            assert code == 0
            outputs.append(
                captured.out.replace(f"threads={threads}", "threads=N")
            )
        if not outputs[0] == outputs[1] == outputs[2]:
            ok = False
            print(f"  non-deterministic output for {argv[0]}")
    with capsys.disabled():
        report(12, ok, "byte-identical reports across --threads 1, 4, 8", t0)
