"""Weyl sums, generic polynomial-phase sums and complete rational sums.

Phase handling is the delicate part. e(t) = exp(2*pi*i*t) only needs t mod
1, so every phase term coeff * x**power is reduced mod 1 *exactly* before
the transcendental call: integer powers are exact Python ints, rational
coefficients reduce by integer arithmetic, and a float coefficient is the
exact dyadic rational num/2^e given by as_integer_ratio(). This keeps
complete sums free of cancellation for large q and keeps Weyl sums honest
for x**k far beyond 2^53.

Sums with more than 10^4 terms are accumulated with compensated (fsum)
summation of the real and imaginary parts.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InputError, PreconditionError
from .forms import DiagonalSystem, ExponentTuple

_FSUM_THRESHOLD = 10_000


def e(t: float) -> complex:
    return cmath.exp(2j * math.pi * t)


def _coeff_ratio(c) -> tuple[int, int]:
    """Exact (num, den) for a float, int or Fraction coefficient."""
    if isinstance(c, Fraction):
        return c.numerator, c.denominator
    if isinstance(c, int):
        return c, 1
    return float(c).as_integer_ratio()


def frac_times_int(coeff, power: int) -> float:
    """Exact-to-rounding fractional part of coeff * power, power an int."""
    num, den = _coeff_ratio(coeff)
    return (num * power % den) / den


def _accumulate(values: np.ndarray) -> complex:
    if len(values) > _FSUM_THRESHOLD:
        return complex(math.fsum(values.real), math.fsum(values.imag))
    return complex(values.sum())


def _phase_fracs(terms: Sequence[tuple[int, object]], xs: Sequence[int]) -> np.ndarray:
    """Fractional parts of sum_i coeff_i * x**exp_i for each x in xs."""
    total = np.zeros(len(xs))
    for exp, coeff in terms:
        num, den = _coeff_ratio(coeff)
        total += np.array([(num * x**exp % den) / den for x in xs])
    return total


@dataclass(frozen=True)
class PolyPhase:
    """Polynomial phase P(t) = sum of coeff * t**exp over distinct exponents."""

    terms: tuple[tuple[int, object], ...]  # (exponent, coefficient)

    def __post_init__(self):
        exps = [exp for exp, _ in self.terms]
        if any(exp < 1 for exp in exps):
            raise InputError(f"phase exponents must be positive, got {exps}")
        if len(set(exps)) != len(exps):
            raise InputError(f"phase exponents must be distinct, got {exps}")

    @classmethod
    def dense(cls, coeffs: Sequence) -> "PolyPhase":
        """P_d(beta; t) = beta_1 t + ... + beta_d t^d."""
        return cls(tuple((j + 1, c) for j, c in enumerate(coeffs)))

    @classmethod
    def sparse(cls, pairs: Sequence[tuple[int, object]]) -> "PolyPhase":
        return cls(tuple((int(k), c) for k, c in pairs))

    @classmethod
    def missing_degree(cls, k: int, alpha: Sequence, theta) -> "PolyPhase":
        """g_k phase: degrees 1..k-2 with coefficients alpha, plus theta * t^k."""
        if k < 3:
            raise InputError(f"missing-degree phase needs k >= 3, got {k}")
        if len(alpha) != k - 2:
            raise InputError(
                f"expected {k - 2} low-degree coefficients, got {len(alpha)}"
            )
        return cls(tuple((j + 1, c) for j, c in enumerate(alpha)) + ((k, theta),))

    @property
    def degree(self) -> int:
        return max(exp for exp, _ in self.terms)


def poly_phase_sum(phase: PolyPhase, window: tuple[int, int]) -> complex:
    """Sum of e(P(x)) over the integer window [lo, hi]."""
    lo, hi = int(window[0]), int(window[1])
    if lo > hi:
        raise InputError(f"empty window [{lo},{hi}]")
    xs = range(lo, hi + 1)
    fr = _phase_fracs(phase.terms, list(xs))
    return _accumulate(np.exp(2j * np.pi * fr))


def weyl_sum(k: ExponentTuple, alpha: Sequence, X: int) -> complex:
    """f_k(alpha; X) = sum over |x| <= X of e(sum_i alpha_i x^{k_i})."""
    if not isinstance(k, ExponentTuple):
        k = ExponentTuple(tuple(k))
    if len(alpha) != k.n:
        raise InputError(f"alpha has {len(alpha)} entries, expected n = {k.n}")
    if X < 0:
        raise InputError(f"X = {X} must be >= 0")
    terms = tuple(zip(k.k, alpha))
    xs = list(range(-X, X + 1))
    fr = _phase_fracs(terms, xs)
    return _accumulate(np.exp(2j * np.pi * fr))


def system_weyl_sum(system: DiagonalSystem, alpha: Sequence, X: int) -> complex:
    """f[F](alpha; X) as the product over columns of scalar Weyl sums."""
    prod = complex(1.0)
    for j in range(1, system.s + 1):
        uj = system.coefficient_column(j)
        twisted = [u * a for u, a in zip(uj, alpha)]
        prod *= weyl_sum(system.k, twisted, X)
    return prod


def system_weyl_sum_direct(system: DiagonalSystem, alpha: Sequence, X: int) -> complex:
    """Direct s-dimensional evaluation; cross-check path, budget (2X+1)^s <= 10^6."""
    import itertools

    if (2 * X + 1) ** system.s > 10**6:
        raise PreconditionError("direct system Weyl sum limited to (2X+1)^s <= 1e6")
    acc = []
    for x in itertools.product(range(-X, X + 1), repeat=system.s):
        vals = system.evaluate(list(x))
        ph = math.fsum(frac_times_int(a, v) for a, v in zip(alpha, vals))
        acc.append(e(ph))
    return _accumulate(np.array(acc))


def complete_sum(k: ExponentTuple, q: int, a: Sequence[int]) -> complex:
    """S_k(q; a) = sum_{r=1}^{q} e(a . (r^{k_1},...,r^{k_n}) / q).

    Phases are exact rationals (mod q before dividing), so the result is
    immune to cancellation however large q grows.
    """
    if not isinstance(k, ExponentTuple):
        k = ExponentTuple(tuple(k))
    if q < 1:
        raise InputError(f"q = {q} must be >= 1")
    if len(a) != k.n:
        raise InputError(f"a has {len(a)} entries, expected n = {k.n}")
    rs = np.arange(1, q + 1, dtype=np.int64)
    num = np.zeros(q, dtype=np.int64)
    for ki, ai in zip(k.k, a):
        powmod = np.array([pow(int(r), ki, q) for r in range(1, q + 1)], dtype=np.int64)
        num = (num + (int(ai) % q) * powmod) % q
    table = np.exp(2j * np.pi * np.arange(q) / q)
    return _accumulate(table[num % q]) if len(rs) else complex(q)


def complete_sum_system(system: DiagonalSystem, q: int, a: Sequence[int]) -> complex:
    """S[F](q; a) as the product over columns of scalar complete sums.

    Never enumerates [1,q]^s; see complete_sum_system_direct for the
    cross-check path.
    """
    if len(a) != system.n:
        raise InputError(f"a has {len(a)} entries, expected n = {system.n}")
    memo: dict[tuple[int, ...], complex] = {}
    prod = complex(1.0)
    for j in range(1, system.s + 1):
        uj = system.coefficient_column(j)
        key = tuple((u * int(ai)) % q for u, ai in zip(uj, a))
        if key not in memo:
            memo[key] = complete_sum(system.k, q, key)
        prod *= memo[key]
    return prod


def complete_sum_system_direct(
    system: DiagonalSystem, q: int, a: Sequence[int]
) -> complex:
    """Direct enumeration of r in [1,q]^s; cross-check path for q^s <= 10^6."""
    import itertools

    if q**system.s > 10**6:
        raise PreconditionError("direct system complete sum limited to q^s <= 1e6")
    acc = []
    for r in itertools.product(range(1, q + 1), repeat=system.s):
        vals = system.evaluate(list(r))
        num = sum(int(ai) * v for ai, v in zip(a, vals)) % q
        acc.append(e(num / q))
    return _accumulate(np.array(acc))


def gcd_vector(a: Sequence[int], q: int) -> int:
    g = q
    for ai in a:
        g = math.gcd(g, int(ai))
    return g


@dataclass(frozen=True)
class BoundSweepReport:
    """Result of an empirical fitted-constant bound sweep.

    The constant is fitted on the sweep's calibration slice; the remaining
    samples are asserted against slack * fitted constant.
    """

    rows: tuple[tuple, ...]  # (q, kind, ratio)
    eps: float
    fitted_constant: float
    slack: float
    max_ratio: float
    ok: bool


def complete_sum_bound_check(
    k: ExponentTuple,
    q_list: Sequence[int],
    trials: int = 8,
    eps: float = 0.1,
    seed: int = 0,
    slack: float = 2.0,
    fit_qmax: int = 20,
) -> BoundSweepReport:
    """Empirical check of the complete-sum bounds.

    Part (i): |S_k(q;a)| <= C (a;q)^{1/k} q^{1-1/k+eps} for random a.
    Part (iii): |S_k(q;a tensor w)| <= C (prod |w_i|)^{1/k} q^{1-1/k+eps}
    for random a coprime to q and random nonzero weights. C is fitted on
    q <= fit_qmax and asserted with the slack factor beyond.
    """
    if not isinstance(k, ExponentTuple):
        k = ExponentTuple(tuple(k))
    if not q_list:
        raise InputError("q_list must be nonempty")
    if eps <= 0:
        raise InputError(f"eps = {eps} must be positive")
    rng = np.random.Generator(np.random.Philox(key=seed))
    kn = k.max_degree
    rows = []
    for q in sorted(q_list):
        denom_base = q ** (1 - 1 / kn + eps)
        for _ in range(trials):
            a = [int(rng.integers(1, q + 1)) for _ in range(k.n)]
            g = gcd_vector(a, q)
            ratio = abs(complete_sum(k, q, a)) / (g ** (1 / kn) * denom_base)
            rows.append((q, "i", ratio))
            # part (iii): coprime a, nonzero weights
            while True:
                a = [int(rng.integers(1, q + 1)) for _ in range(k.n)]
                if gcd_vector(a, q) == 1:
                    break
            w = []
            while len(w) < k.n:
                wi = int(rng.integers(-5, 6))
                if wi != 0:
                    w.append(wi)
            tw = [wi * ai for wi, ai in zip(w, a)]
            wprod = 1
            for wi in w:
                wprod *= abs(wi)
            ratio = abs(complete_sum(k, q, tw)) / (wprod ** (1 / kn) * denom_base)
            rows.append((q, "iii", ratio))
    fit_rows = [r for r in rows if r[0] <= fit_qmax]
    rest_rows = [r for r in rows if r[0] > fit_qmax]
    if not fit_rows:
        fit_rows = rows
        rest_rows = []
    fitted = max(r[2] for r in fit_rows)
    max_ratio = max(r[2] for r in rows)
    ok = all(r[2] <= slack * max(fitted, 1e-300) for r in rest_rows)
    return BoundSweepReport(tuple(rows), eps, fitted, slack, max_ratio, ok)


def distance_to_int(t: np.ndarray) -> np.ndarray:
    return np.abs(t - np.round(t))


def psi(k_top: int, theta: float, mu: float, X: int) -> float:
    """(1/X) * sum_{y<=X} min(X^{k-1}, 1 / ||k theta y + mu||), exactly as stated.

    ||.|| hitting 0 is not an error: the min then picks X^{k-1}.
    """
    if k_top < 3:
        raise InputError(f"psi needs k >= 3, got {k_top}")
    if X < 1:
        raise InputError(f"X = {X} must be >= 1")
    ys = np.arange(1, X + 1, dtype=float)
    dist = distance_to_int(k_top * theta * ys + mu)
    cap = float(X) ** (k_top - 1)
    with np.errstate(divide="ignore"):
        vals = np.where(dist * cap <= 1.0, cap, 1.0 / np.maximum(dist, 1e-300))
    return float(vals.sum() / X)


def psi_star(k_top: int, theta: float, X: int, grid_size: int | None = None) -> float:
    """Max of psi over a uniform mu-grid on [0,1).

    This is a certified LOWER bound for the supremum over real mu (psi is
    1-periodic in mu); default grid is 4*X points.
    """
    if grid_size is None:
        grid_size = 4 * X
    if grid_size < 1:
        raise InputError(f"grid_size = {grid_size} must be >= 1")
    ys = np.arange(1, X + 1, dtype=float)
    base = k_top * theta * ys
    cap = float(X) ** (k_top - 1)
    best = 0.0
    mus = np.arange(grid_size) / grid_size
    # chunk the (y, mu) matrix to keep memory modest
    chunk = max(1, int(4e6) // max(1, X))
    for start in range(0, grid_size, chunk):
        m = mus[start : start + chunk]
        dist = distance_to_int(base[:, None] + m[None, :])
        with np.errstate(divide="ignore"):
            vals = np.where(dist * cap <= 1.0, cap, 1.0 / np.maximum(dist, 1e-300))
        best = max(best, float(vals.sum(axis=0).max() / X))
    return best


K135 = ExponentTuple((1, 3, 5))


def f_135(alpha: Sequence, X: int) -> complex:
    """The k=(1,3,5) Weyl sum."""
    return weyl_sum(K135, alpha, X)


def vdc_ratio(alpha: Sequence[float], X: int) -> float:
    """|f(alpha; X)| * (1 + X^5 |alpha_3|)^{1/10} / X for the (1,3,5) sum.

    Requires |alpha_3| <= X^{-10/3}; violations are rejected with the
    threshold reported.
    """
    if len(alpha) != 3:
        raise InputError("vdc_ratio needs a real triple")
    if X < 1:
        raise InputError(f"X = {X} must be >= 1")
    threshold = float(X) ** (-10.0 / 3.0)
    a3 = abs(float(alpha[2]))
    if a3 > threshold:
        raise PreconditionError(
            f"|alpha_3| = {a3} exceeds the admissible X^(-10/3) = {threshold}"
        )
    value = abs(f_135(alpha, X))
    return value * (1.0 + float(X) ** 5 * a3) ** 0.1 / X
