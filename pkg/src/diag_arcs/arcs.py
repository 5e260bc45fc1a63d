"""Major/minor arc geometry, rational reconstruction and the major-arc
approximations with measured errors.

Arc parameters are exact: Q = floor(X^tau) is computed by integer root
extraction for rational tau, never by floating powers. Classification
follows the box membership test literally (nearest admissible numerator
per denominator, joint coprimality, per-coordinate interval test) and a
brute-force scan over all (q, a) is provided as the test oracle.

Rational reconstruction (the w-twisted common-denominator lemma) is done
in exact Fraction arithmetic; "X large enough" is operationalized as: the
reconstructed (q, a) must satisfy every stated output bound, otherwise
the call is rejected with a too-small-X diagnostic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import BudgetError, InputError, PreconditionError
from .expsums import (
    complete_sum,
    complete_sum_system,
    frac_times_int,
    weyl_sum,
    system_weyl_sum,
)
from .forms import DiagonalSystem, ExponentTuple
from .oscillatory import QuadratureResult, SingularIntegral, v_k, v_system
from .quadrature import WEIGHTS_G7, WEIGHTS_K15, panel_points, uniform_edges
from .series import SeriesApproximation


def integer_root(n: int, r: int) -> int:
    """floor(n ** (1/r)) for nonnegative n, exact."""
    if n < 0 or r < 1:
        raise InputError("integer_root needs n >= 0, r >= 1")
    if n in (0, 1) or r == 1:
        return n
    x = int(round(n ** (1.0 / r)))
    while x > 0 and x**r > n:
        x -= 1
    while (x + 1) ** r <= n:
        x += 1
    return x


def floor_power(X: int, tau: Fraction) -> int:
    """floor(X^tau) exactly for rational tau in (0, 1]."""
    num, den = tau.numerator, tau.denominator
    return integer_root(X**num, den)


def parse_tau(tau) -> Fraction:
    if isinstance(tau, Fraction):
        return tau
    if isinstance(tau, str):
        if "/" in tau:
            a, b = tau.split("/")
            return Fraction(int(a), int(b))
        return Fraction(tau)
    if isinstance(tau, int):
        return Fraction(tau)
    # floats: accept the exact dyadic value
    return Fraction(float(tau)).limit_denominator(10**6)


@dataclass(frozen=True)
class ArcParams:
    """Geometry of the arc decomposition: Q = floor(X^tau), Q0 = 2Q.

    theorem_regime records whether tau >= 1/(n k_n), the range the
    asymptotic analysis assumes; smaller tau still yields a well-defined
    decomposition and is allowed for diagnostics.
    """

    X: int
    tau: Fraction
    Q: int
    Q0: int
    theorem_regime: bool = True


def arc_params(X: int, tau, k: ExponentTuple) -> ArcParams:
    if X < 1:
        raise InputError(f"X = {X} must be >= 1")
    if not isinstance(k, ExponentTuple):
        k = ExponentTuple(tuple(k))
    tau = parse_tau(tau)
    if not 0 < tau <= 1:
        raise InputError(f"tau = {tau} must lie in (0, 1]")
    lo = Fraction(1, k.n * k.max_degree)
    Q = floor_power(X, tau)
    if Q < 1:
        raise InputError(f"Q = floor({X}^{tau}) = {Q} must be >= 1")
    return ArcParams(X=X, tau=tau, Q=Q, Q0=2 * Q, theorem_regime=tau >= lo)


@dataclass(frozen=True)
class ArcLabel:
    classification: str  # "major" | "minor"
    q: int | None = None
    a: tuple[int, ...] | None = None

    @property
    def is_major(self) -> bool:
        return self.classification == "major"


def _in_box(params: ArcParams, alpha: Sequence) -> bool:
    lo = Fraction(1, params.Q0)
    hi = 1 + lo
    return all(lo <= Fraction(a) <= hi for a in map(_exact, alpha))


def _exact(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(float(x))


def _nearest_numerator(q: int, alpha: Fraction) -> int:
    """Nearest integer to q*alpha within [1, q]; ties take the smaller."""
    target = q * alpha
    lo = math.floor(target)
    a = lo if target - lo <= Fraction(1, 2) else lo + 1
    return min(max(a, 1), q)


def classify(
    params: ArcParams, k: ExponentTuple, alpha: Sequence
) -> ArcLabel:
    """Major/minor classification by scanning q = 1..Q.

    For each q the candidate numerator vector is the nearest admissible
    one; the point is Major(q, a) iff every coordinate lies within
    Q/(q X^{k_i}) of a_i/q and (a; q) = 1. Smallest q wins.
    """
    if not isinstance(k, ExponentTuple):
        k = ExponentTuple(tuple(k))
    if len(alpha) != k.n:
        raise InputError(f"alpha has {len(alpha)} entries, expected {k.n}")
    if not _in_box(params, alpha):
        raise InputError("alpha outside the shifted unit box")
    av = [_exact(x) for x in alpha]
    for q in range(1, params.Q + 1):
        a = tuple(_nearest_numerator(q, x) for x in av)
        g = math.gcd(q, *a)
        if g != 1:
            continue
        ok = True
        for x, ai, ki in zip(av, a, k.k):
            if abs(x - Fraction(ai, q)) > Fraction(params.Q, q * params.X**ki):
                ok = False
                break
        if ok:
            return ArcLabel("major", q, a)
    return ArcLabel("minor")


def coprime_vectors(q: int, n: int):
    """A_n(q): vectors in [1,q]^n jointly coprime to q, lexicographic."""
    for a in itertools.product(range(1, q + 1), repeat=n):
        if math.gcd(q, *a) == 1:
            yield a


def classify_scan(
    params: ArcParams, k: ExponentTuple, alpha: Sequence
) -> ArcLabel:
    """Oracle classification: exhaustive scan over all (q, a)."""
    if not isinstance(k, ExponentTuple):
        k = ExponentTuple(tuple(k))
    av = [_exact(x) for x in alpha]
    for q in range(1, params.Q + 1):
        for a in coprime_vectors(q, k.n):
            if all(
                abs(x - Fraction(ai, q)) <= Fraction(params.Q, q * params.X**ki)
                for x, ai, ki in zip(av, a, k.k)
            ):
                return ArcLabel("major", q, a)
    return ArcLabel("minor")


def arc_box(
    params: ArcParams, k: ExponentTuple, q: int, a: Sequence[int]
) -> tuple[tuple[Fraction, Fraction], ...]:
    """The closed box M(q, a), exact rational endpoints."""
    return tuple(
        (
            Fraction(ai, q) - Fraction(params.Q, q * params.X**ki),
            Fraction(ai, q) + Fraction(params.Q, q * params.X**ki),
        )
        for ai, ki in zip(a, k.k)
    )


def arcs_disjoint(
    params: ArcParams, k: ExponentTuple, max_arcs: int = 20000
) -> bool:
    """Pairwise disjointness of all major arc boxes (exact arithmetic)."""
    if not isinstance(k, ExponentTuple):
        k = ExponentTuple(tuple(k))
    boxes = []
    for q in range(1, params.Q + 1):
        for a in coprime_vectors(q, k.n):
            boxes.append(arc_box(params, k, q, a))
            if len(boxes) > max_arcs:
                raise BudgetError(
                    f"more than {max_arcs} arcs; disjointness scan too large"
                )
    # essential disjointness: boundary contact (empty interior) is allowed
    for b1, b2 in itertools.combinations(boxes, 2):
        if all(lo1 < hi2 and lo2 < hi1 for (lo1, hi1), (lo2, hi2) in zip(b1, b2)):
            return False
    return True


def convergents(theta: Fraction):
    """Continued-fraction convergents of theta (terminates for rationals)."""
    p_prev, q_prev = 1, 0
    p_cur, q_cur = int(math.floor(theta)), 1
    yield p_cur, q_cur
    rem = theta - math.floor(theta)
    while rem != 0:
        theta = 1 / rem
        a = int(math.floor(theta))
        rem = theta - a
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        yield p_cur, q_cur


def best_rational_approx(theta, Q_max: int) -> tuple[int, int]:
    """Dirichlet-quality (b, q): coprime, q <= Q_max, |theta - b/q| <= 1/(q Q_max).

    Taken from the continued-fraction convergents of theta.
    """
    if Q_max < 1:
        raise InputError(f"Q_max = {Q_max} must be >= 1")
    theta = _exact(theta)
    best = (int(math.floor(theta)), 1)
    for p, q in convergents(theta):
        if q > Q_max:
            break
        best = (p, q)
    return best


def approx_candidates(theta, q_bound: int):
    """All (b, q), q <= q_bound, that can satisfy |theta - b/q| <= 1/q^2.

    Solutions of that inequality are convergents or semiconvergents of
    theta; both are enumerated (semiconvergents included for safety) and
    the caller applies the inequality itself.
    """
    theta = _exact(theta)
    if q_bound < 1:
        return
    prev = (1, 0)
    cur = (int(math.floor(theta)), 1)
    if cur[1] <= q_bound:
        yield cur
    rem = theta - math.floor(theta)
    while rem != 0 and cur[1] <= q_bound:
        theta_i = 1 / rem
        a = int(math.floor(theta_i))
        rem = theta_i - a
        # semiconvergents between prev and the next convergent
        for t in range(1, a):
            b = t * cur[0] + prev[0]
            q = t * cur[1] + prev[1]
            if q > q_bound:
                break
            yield (b, q)
        nxt = (a * cur[0] + prev[0], a * cur[1] + prev[1])
        prev, cur = cur, nxt
        if cur[1] <= q_bound:
            yield cur


@dataclass(frozen=True)
class CombinedApprox:
    """Common-denominator reconstruction of a w-twisted approximation."""

    q: int
    a: tuple[int, ...]
    beta: tuple[Fraction, ...]
    h: int  # denominator of (w tensor a)/q in lowest terms
    M0: int


def _lcm(values) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


def combine_approx(
    w: Sequence[int],
    alpha: Sequence,
    approximations: dict[int, tuple[int, int]],
    k: ExponentTuple,
    X: int,
    lam: Sequence[float],
) -> CombinedApprox:
    """Reconstruct (q, a, beta) from per-coordinate approximations of w_i alpha_i.

    approximations maps 1-based coordinate i (every i with k_i >= 2) to a
    coprime pair (b_i, q_i) satisfying |w_i alpha_i - b_i/q_i| <=
    X^{lam_i} / (q_i X^{k_i}) with q_i <= X^{lam_i}. All stated output
    bounds are verified; any failure raises with a too-small-X diagnostic.
    """
    if not isinstance(k, ExponentTuple):
        k = ExponentTuple(tuple(k))
    n = k.n
    if len(w) != n or len(alpha) != n or len(lam) != n:
        raise InputError("w, alpha and lam must all have n entries")
    if any(wi == 0 for wi in w):
        raise InputError("w must have nonzero entries")
    lam = [float(x) for x in lam]
    if any(x <= 0 for x in lam):
        raise InputError("lambda entries must be positive")
    sigma = sum(lam)
    if sigma >= 1:
        raise PreconditionError(f"sum of lambda = {sigma} must be < 1")
    M0 = 1
    for wi in w:
        M0 *= abs(int(wi))
    av = [_exact(x) for x in alpha]

    high = [i for i in range(1, n + 1) if k.k[i - 1] >= 2]
    slack = 1 + 1e-12  # float powers X^lam guard the rational comparisons
    for i in high:
        if i not in approximations:
            raise InputError(f"missing approximation for coordinate {i}")
        b_i, q_i = approximations[i]
        if q_i < 1 or math.gcd(b_i, q_i) != 1:
            raise InputError(f"({b_i},{q_i}) must be coprime with q >= 1")
        bound_q = float(X) ** lam[i - 1]
        if q_i > bound_q * slack:
            raise PreconditionError(
                f"q_{i} = {q_i} exceeds X^lambda_{i} = {bound_q:.6g}"
            )
        diff = abs(w[i - 1] * av[i - 1] - Fraction(b_i, q_i))
        bound = bound_q / (q_i * float(X) ** k.k[i - 1])
        if float(diff) > bound * slack:
            raise PreconditionError(
                f"coordinate {i}: |w alpha - b/q| = {float(diff):.3e} "
                f"violates the lemma hypothesis {bound:.3e}"
            )

    # common denominator q' of b_i/(q_i w_i) over the high coordinates
    fracs = {i: Fraction(approximations[i][0], approximations[i][1] * w[i - 1])
             for i in high}
    q_prime = _lcm(f.denominator for f in fracs.values()) if fracs else 1
    c = [0] * (n + 1)  # 1-based
    for i in high:
        c[i] = int(fracs[i] * q_prime)

    if k.k[0] == 1:
        # minimal integer c_1 with |w_1 alpha_1 - c_1/q'| <= 1/(2 q')
        target = w[0] * av[0] * q_prime
        c1 = math.ceil(target - Fraction(1, 2))
        if abs(w[0] * av[0] - Fraction(c1, q_prime)) > Fraction(1, 2 * q_prime):
            raise PreconditionError("no admissible c_1 at this X (degenerate)")
        c[1] = c1

    # joint a_i/q: coordinate fractions approximating alpha itself
    # (c_i/q' already approximates alpha_i for the high coordinates; the
    # linear coordinate carries the extra w_1 from its c_1 construction)
    out_fracs = [Fraction(c[i], q_prime) for i in range(1, n + 1)]
    if k.k[0] == 1:
        out_fracs[0] = Fraction(c[1], w[0] * q_prime)
    q = _lcm(f.denominator for f in out_fracs)
    a = tuple(int(f * q) for f in out_fracs)
    if math.gcd(q, *a) != 1:
        raise PreconditionError("reconstruction failed joint coprimality")
    if q > M0 * float(X) ** sigma * slack:
        raise PreconditionError(
            f"q = {q} exceeds M0 X^sigma = {M0 * float(X) ** sigma:.6g}; "
            "X is below the lemma regime"
        )

    # h: denominator of (w tensor a)/q in lowest terms
    g = math.gcd(q, *[w[i] * a[i] for i in range(n)])
    h = q // g
    if not (q <= h * M0 and h <= q):
        raise PreconditionError(f"h = {h} violates q/M0 <= h <= q")

    beta = tuple(av[i] - Fraction(a[i], q) for i in range(n))
    # output beta bounds
    for i in range(n):
        if i == 0 and k.k[0] == 1:
            bound = Fraction(1, 2 * abs(w[0]) * h)
            if abs(beta[0]) > bound:
                raise PreconditionError(
                    "beta_1 bound failed; X is below the lemma regime"
                )
        else:
            bound_f = M0 * float(X) ** sigma / (q * float(X) ** k.k[i])
            if float(abs(beta[i])) > bound_f * slack:
                raise PreconditionError(
                    f"beta_{i + 1} bound failed; X is below the lemma regime"
                )
    gamma = [w[i] * beta[i] for i in range(n)]
    if not cond_beta_holds(k, gamma, h, X):
        raise PreconditionError(
            "w tensor beta violates the coordinate condition at frak_q = h"
        )
    return CombinedApprox(q=q, a=a, beta=beta, h=h, M0=M0)


def cond_beta_holds(k: ExponentTuple, gamma: Sequence, q_frak: int, X: int) -> bool:
    """Literal evaluation of the k_1 = 1 / k_1 > 1 coordinate condition."""
    if not isinstance(k, ExponentTuple):
        k = ExponentTuple(tuple(k))
    g = [abs(float(x)) for x in gamma]
    if k.k[0] == 1:
        head = g[0] <= 1.0 / (2 * q_frak) + 1e-15
        tail = sum(
            ki * gi * float(X) ** (ki - 1) for ki, gi in zip(k.k[1:], g[1:])
        )
        return head and tail <= 1.0 / (4 * q_frak) + 1e-15
    total = sum(ki * gi * float(X) ** (ki - 1) for ki, gi in zip(k.k, g))
    return total <= 1.0 / (4 * q_frak) + 1e-15


def xi(k: ExponentTuple, beta: Sequence, X: int) -> float:
    """1 + sum_i |beta_i| X^{k_i}."""
    if not isinstance(k, ExponentTuple):
        k = ExponentTuple(tuple(k))
    return 1.0 + sum(
        abs(float(b)) * float(X) ** ki for b, ki in zip(beta, k.k)
    )


@dataclass(frozen=True)
class MajorErrorReport:
    main_term: complex
    actual: complex
    error: float
    budget: float


def _dense_exponents(k_deg: int) -> ExponentTuple:
    return ExponentTuple(tuple(range(1, k_deg + 1)))


def complete_sum_dense(coeffs: Sequence[int], q: int) -> complex:
    """Complete sum with the dense polynomial phase of degree len(coeffs)."""
    return complete_sum(_dense_exponents(len(coeffs)), q, list(coeffs))


def weyl_major_error(
    k_deg: int,
    q: int,
    a: Sequence[int],
    beta: Sequence[float],
    X: int,
    eps: float = 0.1,
) -> MajorErrorReport:
    """Measured error of the dense-phase major-arc approximation.

    actual: the polynomial Weyl sum at a/q + beta over |x| <= X.
    main_term: (X/q) * complete sum * oscillatory integral.
    budget: (q / (q; a))^{1 - 1/k + eps}, the shape of the stated error.
    """
    if k_deg < 1:
        raise InputError(f"degree k = {k_deg} must be >= 1")
    if len(a) != k_deg or len(beta) != k_deg:
        raise InputError("a and beta must have k entries (dense phase)")
    if q < 1:
        raise InputError(f"q = {q} must be >= 1")
    b1 = abs(float(beta[0]))
    rest = sum(
        j * abs(float(bj)) * float(X) ** (j - 1)
        for j, bj in enumerate(beta[1:], start=2)
    )
    if b1 > 1.0 / (2 * q) + 1e-15 or rest > 1.0 / (4 * q) + 1e-15:
        raise PreconditionError(
            "beta violates |beta_1| <= 1/(2q), "
            "sum j |beta_j| X^{j-1} <= 1/(4q)"
        )
    k = _dense_exponents(k_deg)
    alpha = [Fraction(int(ai), q) + _exact(bj) for ai, bj in zip(a, beta)]
    actual = weyl_sum(k, alpha, X)
    s_q = complete_sum_dense(list(a), q)
    v = v_k(k, [float(bj) for bj in beta], float(X), tol=1e-10)
    main = (X / q) * s_q * v.value
    g = math.gcd(q, *[int(ai) for ai in a])
    budget = float(q // g) ** (1 - 1 / k_deg + eps)
    return MajorErrorReport(main, actual, abs(actual - main), budget)


def system_major_error(
    system: DiagonalSystem,
    q: int,
    a: Sequence[int],
    beta: Sequence[float],
    X: int,
    eps: float = 0.1,
) -> MajorErrorReport:
    """Measured error of the s-fold major-arc approximation for a system."""
    n = system.n
    if len(a) != n or len(beta) != n:
        raise InputError("a and beta must have n entries")
    if not (1 <= min(a) and max(a) <= q and math.gcd(q, *[int(x) for x in a]) == 1):
        raise PreconditionError("a must lie in A_n(q)")
    gamma = [system.sup_norm() * float(b) for b in beta]
    if not cond_beta_holds(system.k, gamma, q, X):
        raise PreconditionError(
            "sup-norm-scaled beta violates the coordinate condition at q"
        )
    alpha = [Fraction(int(ai), q) + _exact(b) for ai, b in zip(a, beta)]
    actual = system_weyl_sum(system, alpha, X)
    s_q = complete_sum_system(system, q, list(a))
    v = v_system(system, [float(b) for b in beta], float(X))
    main = (X / q) ** system.s * s_q * v.value
    kn = system.k.max_degree
    s = system.s
    xv = xi(system.k, beta, X)
    budget = (
        float(X) ** (s - 1) * q ** (1 - s / kn + eps) * xv ** (-(s - 1) / kn)
        + float(q) ** (s - s / kn + eps)
    )
    return MajorErrorReport(main, actual, abs(actual - main), budget)


def major_arc_integral(
    system: DiagonalSystem,
    params: ArcParams,
    quad_budget: int = 20_000_000,
    panels_per_period: float = 1.5,
) -> complex:
    """Integral of the system Weyl sum over the union of major arcs.

    Tensor Gauss-Kronrod panels per arc box, one box at a time, fixed
    ascending-(q, a) accumulation order. Arc disjointness is asserted
    before integrating (the decomposition assumes it).
    """
    n = system.n
    if n > 3:
        raise PreconditionError("major-arc integration implemented for n <= 3")
    if not arcs_disjoint(params, system.k):
        raise PreconditionError(
            "major arcs overlap for these parameters; integral undefined"
        )
    X = params.X
    rate = [
        sum(abs(system.u[i][j]) for j in range(system.s)) * (2 * X + 1)
        for i in range(n)
    ]  # crude phase-rate bound of f[F] per alpha_i, e-units ~ s*|u| * X^{k_i}
    total = 0.0 + 0.0j
    evals = 0
    for q in range(1, params.Q + 1):
        for a in coprime_vectors(q, n):
            box = arc_box(params, system.k, q, a)
            axes = []
            for i, (lo, hi) in enumerate(box):
                width = float(hi - lo)
                travel = width * rate[i] * float(X) ** (system.k.k[i] - 1)
                panels = int(math.ceil(panels_per_period * travel)) + 2
                panels = min(panels, 64)
                edges = uniform_edges(float(lo), float(hi), panels)
                pts = panel_points(edges).ravel()
                h = 0.5 * (edges[1:] - edges[:-1])
                wk = (h[:, None] * WEIGHTS_K15[None, :]).ravel()
                axes.append((pts, wk))
            grids = np.meshgrid(*[ax[0] for ax in axes], indexing="ij")
            flat = [g.ravel() for g in grids]
            evals += len(flat[0])
            if evals > quad_budget:
                raise BudgetError(
                    f"major-arc integral exceeded {quad_budget} evaluations"
                )
            vals = np.array(
                [
                    system_weyl_sum(system, [flat[i][m] for i in range(n)], X)
                    for m in range(len(flat[0]))
                ]
            )
            wtens = axes[0][1]
            for ax in axes[1:]:
                wtens = np.outer(wtens, ax[1]).ravel()
            total += complex(np.dot(wtens, vals))
    return total


@dataclass(frozen=True)
class MainTermPrediction:
    value: float
    uncertainty: float
    exponent: int  # s - sigma(k)
    j_value: float
    s_value: float


def main_term(
    system: DiagonalSystem,
    X: int,
    j_result: SingularIntegral,
    s_result: SeriesApproximation,
) -> MainTermPrediction:
    """J(F) * S(F) * X^{s - sigma(k)} with propagated uncertainty."""
    sigma = sum(system.k.k)
    expo = system.s - sigma
    jv = j_result.value
    je = j_result.error_bar()
    sv = s_result.partial_sum
    se = s_result.tail_report
    scale = float(X) ** expo
    value = jv * sv * scale
    unc = (abs(jv) * se + abs(sv) * je + je * se) * scale
    return MainTermPrediction(value, unc, expo, jv, sv)
