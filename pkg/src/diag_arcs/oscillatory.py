"""Oscillatory integrals, the singular integral by two routes, and the
real-solubility certificate.

v_k(beta; X) = integral over [-1,1] of e(beta . (Xt, (Xt)^{k_2}, ...)) dt
is computed by adaptive Gauss-Kronrod panels whose initial partition
equidistributes the phase travel of each monomial. The singular integral
is the outer integral of the column product of such values over the
frequency box [-U,U]^n; its independent check is a Fejer-smoothed
Monte-Carlo integral in t-space. Keeping the two routes structurally
disjoint is the point: neither shares quadrature machinery with the other.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError, PreconditionError, QuadratureError
from .forms import DiagonalSystem, ExponentTuple
from .quadrature import (
    WEIGHTS_G7,
    WEIGHTS_K15,
    adaptive_panels,
    panel_points,
    phase_equidistributed_edges,
    uniform_edges,
)

ROUTE_TRUNCATED = "truncated_iterated"
ROUTE_SMOOTHED = "smoothed_mc"


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    abs_error_estimate: float
    evaluations: int
    route: str


@dataclass(frozen=True)
class SingularIntegral:
    """A singular-integral estimate with its uncertainty split out.

    quad_error: numeric integration error (truncated route) or one
    standard error (smoothed route). tail_bound: fitted bound on the mass
    beyond the truncation box (zero for the smoothed route).
    """

    value: float
    quad_error: float
    tail_bound: float
    evaluations: int
    route: str
    param: float  # U for truncated, T for smoothed

    def error_bar(self, z: float = 3.0) -> float:
        scale = z if self.route == ROUTE_SMOOTHED else 1.0
        return scale * self.quad_error + self.tail_bound


def _coeffs(k: ExponentTuple, beta: Sequence[float], X: float) -> np.ndarray:
    if len(beta) != k.n:
        raise InputError(f"beta has {len(beta)} entries, expected n = {k.n}")
    return np.array([float(b) * float(X) ** ki for b, ki in zip(beta, k.k)])


def v_k(
    k: ExponentTuple,
    beta: Sequence[float],
    X: float,
    tol: float = 1e-10,
    max_evals: int = 20_000_000,
) -> QuadratureResult:
    """Adaptive evaluation of the basic oscillatory integral over [-1,1]."""
    if not isinstance(k, ExponentTuple):
        k = ExponentTuple(tuple(k))
    c = _coeffs(k, beta, X)
    degrees = np.array(k.k, dtype=float)

    def fvec(ts):
        phase = np.zeros_like(ts)
        for ki, ci in zip(degrees, c):
            phase += ci * np.sign(ts) ** ki * np.abs(ts) ** ki
        return np.exp(2j * np.pi * phase)

    edges = phase_equidistributed_edges(list(zip(k.k, np.abs(c))))
    value, err, evals = adaptive_panels(fvec, edges, tol, max_evals)
    return QuadratureResult(value, err, evals, ROUTE_TRUNCATED)


def _t_grid(
    k: ExponentTuple,
    max_abs_coeffs: Sequence[float],
    density: float = 2.0,
    lo: float = -1.0,
    hi: float = 1.0,
):
    """Shared Kronrod grid on [lo,hi] resolving the worst phase in a batch.

    Returns (points, k15_weights, g7_weights) as flat arrays.
    """
    edges = phase_equidistributed_edges(
        list(zip(k.k, max_abs_coeffs)), lo=lo, hi=hi, density=density
    )
    pts = panel_points(edges)
    h = 0.5 * (edges[1:] - edges[:-1])
    wk = (h[:, None] * WEIGHTS_K15[None, :]).ravel()
    wg = (h[:, None] * WEIGHTS_G7[None, :]).ravel()
    return pts.ravel(), wk, wg


def v_batch(k: ExponentTuple, C: np.ndarray, density: float = 2.0) -> np.ndarray:
    """v values for many coefficient rows at once on one shared t-grid.

    C has shape (B, n); row b holds the monomial coefficients (e-units) of
    one integrand. Non-adaptive: the grid already resolves the worst row.
    All-odd (all-even) degree sets integrate over [0,1] only and fold the
    negative half by conjugation (duplication).
    """
    if not isinstance(k, ExponentTuple):
        k = ExponentTuple(tuple(k))
    C = np.asarray(C, dtype=float)
    all_odd = all(ki % 2 == 1 for ki in k.k)
    all_even = all(ki % 2 == 0 for ki in k.k)
    if all_odd or all_even:
        pts, wk, _ = _t_grid(k, np.abs(C).max(axis=0), density, lo=0.0, hi=1.0)
    else:
        pts, wk, _ = _t_grid(k, np.abs(C).max(axis=0), density)
    tpow = np.stack([np.sign(pts) ** ki * np.abs(pts) ** ki for ki in k.k])
    out = np.empty(len(C), dtype=complex)
    chunk = max(1, int(4e6) // max(1, len(pts)))
    for start in range(0, len(C), chunk):
        phase = C[start : start + chunk] @ tpow
        out[start : start + chunk] = np.exp(2j * np.pi * phase) @ wk
    if all_odd:
        return 2.0 * out.real + 0.0j
    if all_even:
        return 2.0 * out
    return out


def v_system(
    system: DiagonalSystem,
    beta: Sequence[float],
    X: float,
    tol: float = 1e-10,
) -> QuadratureResult:
    """v[F](beta; X) as the product of per-column v values.

    The per-factor error estimates propagate through the product as
    prod(|v_j| + e_j) - prod(|v_j|).
    """
    values = []
    errors = []
    evals = 0
    memo: dict[tuple[int, ...], QuadratureResult] = {}
    for j in range(1, system.s + 1):
        uj = system.coefficient_column(j)
        neg = tuple(-u for u in uj)
        if uj in memo:
            r = memo[uj]
        elif neg in memo:
            rn = memo[neg]
            r = QuadratureResult(
                rn.value.conjugate(), rn.abs_error_estimate, 0, rn.route
            )
        else:
            r = v_k(system.k, [u * b for u, b in zip(uj, beta)], X, tol=tol)
            memo[uj] = r
        values.append(r.value)
        errors.append(r.abs_error_estimate)
        evals += r.evaluations
    prod = complex(1.0)
    for v in values:
        prod *= v
    hi = 1.0
    lo = 1.0
    for v, err in zip(values, errors):
        hi *= abs(v) + err
        lo *= abs(v)
    return QuadratureResult(prod, hi - lo, evals, ROUTE_TRUNCATED)


@dataclass(frozen=True)
class SweepReport:
    """Two-half sweep of a bounded statistic, ordered by sweep parameter."""

    rows: tuple[tuple[float, float], ...]  # (parameter, statistic)
    first_half_max: float
    second_half_max: float
    ok: bool  # second-half max <= slack * first-half max
    slack: float


def two_half_report(rows, slack: float = 2.0) -> SweepReport:
    rows = tuple(sorted(rows, key=lambda r: r[0]))
    half = len(rows) // 2
    first = max(r[1] for r in rows[:half]) if half else 0.0
    second = max(r[1] for r in rows[half:]) if rows[half:] else 0.0
    return SweepReport(rows, first, second, second <= slack * first, slack)


def decay_check(
    k: ExponentTuple,
    sample_count: int = 1000,
    seed: int = 0,
    r_range: tuple[float, float] = (1.0, 1e6),
) -> SweepReport:
    """Empirical oscillatory decay: |v_k(beta;1)| * (1 + sum|beta|)^{1/k_n}.

    beta is drawn with sum|beta_i| log-uniform over r_range and random
    component split/signs; the statistic should stay bounded, asserted via
    the two-half criterion on the R-ordered sweep.
    """
    if not isinstance(k, ExponentTuple):
        k = ExponentTuple(tuple(k))
    rng = np.random.Generator(np.random.Philox(key=seed))
    lo, hi = r_range
    rows = []
    for _ in range(sample_count):
        R = math.exp(rng.uniform(math.log(lo), math.log(hi)))
        weights = rng.dirichlet(np.ones(k.n))
        signs = rng.choice([-1.0, 1.0], size=k.n)
        beta = R * weights * signs
        r = v_k(k, beta, 1.0, tol=1e-9)
        stat = abs(r.value) * (1.0 + R) ** (1.0 / k.max_degree)
        rows.append((R, stat))
    return two_half_report(rows)


def _column_signature(system: DiagonalSystem):
    """Canonical +/- column classes: conjugate columns share one v value."""
    classes: dict[tuple[int, ...], tuple[int, int]] = {}
    plan = []  # (class_index, conjugate?)
    reps: list[tuple[int, ...]] = []
    for j in range(1, system.s + 1):
        uj = system.coefficient_column(j)
        neg = tuple(-u for u in uj)
        if uj in classes:
            plan.append((classes[uj][0], False))
        elif neg in classes:
            plan.append((classes[neg][0], True))
        else:
            classes[uj] = (len(reps), 0)
            reps.append(uj)
            plan.append((len(reps) - 1, False))
    return reps, plan


def _si_truncated_value_1d(
    system: DiagonalSystem, U: float, tol: float, max_evals: int
):
    """2 Re of the [0,U] half-line integral of the column product (n=1).

    The half-line is cut into dyadic segments so the shared inner t-grid
    of each batch is sized by the segment's own oscillation, not by the
    global maximum.
    """
    reps, plan = _column_signature(system)
    k = system.k

    def fvec(betas):
        vals = [v_batch(k, betas[:, None] * u[0]) for u in reps]
        out = np.ones(len(betas), dtype=complex)
        for idx, conj in plan:
            out *= np.conj(vals[idx]) if conj else vals[idx]
        return out

    seg_edges = [0.0]
    step = 1.0
    while seg_edges[-1] < U:
        seg_edges.append(min(seg_edges[-1] + step, U))
        step *= 2.0
    rate = sum(abs(system.u[0][j]) for j in range(system.s))
    nseg = len(seg_edges) - 1
    value = 0.0 + 0.0j
    err_total = 0.0
    evals = 0
    for lo, hi in zip(seg_edges[:-1], seg_edges[1:]):
        panels = int(np.ceil((hi - lo) * rate)) + 4
        edges = uniform_edges(lo, hi, panels)
        v, e, ev = adaptive_panels(fvec, edges, tol / (2 * nseg), max_evals)
        value += v
        err_total += e
        evals += ev
    return 2.0 * value.real, 2.0 * err_total, evals


def _beta_grid(lo, hi, rate, cap=1200):
    panels = int(np.ceil((hi - lo) * rate)) + 4
    panels = min(panels, cap)
    edges = uniform_edges(lo, hi, panels)
    pts = panel_points(edges).ravel()
    h = 0.5 * (edges[1:] - edges[:-1])
    wk = (h[:, None] * WEIGHTS_K15[None, :]).ravel()
    wg = (h[:, None] * WEIGHTS_G7[None, :]).ravel()
    return pts, wk, wg


def _si_truncated_value_2d(
    system: DiagonalSystem, U: float, tol: float, max_evals: int
):
    """Tensor-panel outer quadrature for n = 2, factorized per column.

    For a diagonal system the column phase separates per coordinate, so
    the (beta_1, beta_2) tensor of v values is a matrix product
    (E1 * w_t) @ E2^T per column class; the elementwise product over
    columns is then contracted with the outer panel weights. Error is
    estimated from the embedded Gauss rule in each beta direction.
    """
    k = system.k
    reps, plan = _column_signature(system)
    rate1 = sum(abs(system.u[0][j]) for j in range(system.s))
    rate2 = sum(abs(system.u[1][j]) for j in range(system.s))

    scale = 1.0
    evals_total = 0
    while True:
        b1, w1k, w1g = _beta_grid(0.0, U, rate1 * scale, cap=3000)
        b2, w2k, w2g = _beta_grid(-U, U, rate2 * scale, cap=6000)
        max1 = max(abs(u[0]) for u in reps) * U
        max2 = max(abs(u[1]) for u in reps) * U
        tpts, wtk, _ = _t_grid(k, [max1, max2])
        if len(b1) * len(b2) * 16 > 4e9:
            raise QuadratureError(
                f"outer tensor grid {len(b1)}x{len(b2)} exceeds memory cap"
            )
        t1 = np.sign(tpts) ** k.k[0] * np.abs(tpts) ** k.k[0]
        t2 = np.sign(tpts) ** k.k[1] * np.abs(tpts) ** k.k[1]
        prod = np.ones((len(b1), len(b2)), dtype=complex)
        for idx, u in enumerate(reps):
            mult_plain = sum(1 for i, c in plan if i == idx and not c)
            mult_conj = sum(1 for i, c in plan if i == idx and c)
            e1 = np.exp(2j * np.pi * np.outer(u[0] * b1, t1)) * wtk[None, :]
            e2 = np.exp(2j * np.pi * np.outer(u[1] * b2, t2))
            v = e1 @ e2.T
            evals_total += v.size
            if mult_plain:
                prod *= v if mult_plain == 1 else v**mult_plain
            if mult_conj:
                vc = np.conj(v)
                prod *= vc if mult_conj == 1 else vc**mult_conj
        i_kk = w1k @ prod @ w2k
        i_gg = w1g @ prod @ w2g
        i_gk = w1g @ prod @ w2k
        i_kg = w1k @ prod @ w2g
        err = abs(i_kk - i_gg) + abs(i_kk - i_gk) + abs(i_kk - i_kg)
        value = 2.0 * i_kk.real
        if err * 2 <= tol or scale >= 4.0 or evals_total >= max_evals:
            return value, 2.0 * err, evals_total
        scale *= 2.0


def _si_truncated_value_3d(
    system: DiagonalSystem, U: float, tol: float, max_evals: int
):
    """n = 3 tensor route; desk-scale only (tight grid caps)."""
    k = system.k
    reps, plan = _column_signature(system)
    rates = [
        sum(abs(system.u[i][j]) for j in range(system.s)) for i in range(3)
    ]
    b1, w1k, w1g = _beta_grid(0.0, U, rates[0], cap=120)
    b2, w2k, w2g = _beta_grid(-U, U, rates[1], cap=240)
    b3, w3k, w3g = _beta_grid(-U, U, rates[2], cap=240)
    if len(b1) * len(b2) * len(b3) > 3e7:
        raise QuadratureError(
            "n=3 outer tensor grid exceeds the desk-scale cap; reduce U"
        )
    maxes = [max(abs(u[i]) for u in reps) * U for i in range(3)]
    tpts, wtk, _ = _t_grid(k, maxes)
    tpows = [np.sign(tpts) ** ki * np.abs(tpts) ** ki for ki in k.k]
    prod = np.ones((len(b1), len(b2), len(b3)), dtype=complex)
    evals = 0
    for idx, u in enumerate(reps):
        e1 = np.exp(2j * np.pi * np.outer(u[0] * b1, tpows[0])) * wtk[None, :]
        e2 = np.exp(2j * np.pi * np.outer(u[1] * b2, tpows[1]))
        e3 = np.exp(2j * np.pi * np.outer(u[2] * b3, tpows[2]))
        v = np.einsum("ag,bg,cg->abc", e1, e2, e3, optimize=True)
        evals += v.size
        mult_plain = sum(1 for i, c in plan if i == idx and not c)
        mult_conj = sum(1 for i, c in plan if i == idx and c)
        if mult_plain:
            prod *= v**mult_plain if mult_plain > 1 else v
        if mult_conj:
            vc = np.conj(v)
            prod *= vc**mult_conj if mult_conj > 1 else vc
    def contract(wa, wb, wc):
        return np.einsum("abc,a,b,c->", prod, wa, wb, wc, optimize=True)

    i_kkk = contract(w1k, w2k, w3k)
    err = (
        abs(i_kkk - contract(w1g, w2k, w3k))
        + abs(i_kkk - contract(w1k, w2g, w3k))
        + abs(i_kkk - contract(w1k, w2k, w3g))
    )
    return 2.0 * i_kkk.real, 2.0 * err, evals


def singular_integral_truncated(
    system: DiagonalSystem,
    U: float,
    tol: float = 1e-6,
    max_evals: int = 400_000_000,
) -> SingularIntegral:
    """Integral of v[F](beta; 1) over [-U,U]^n plus a fitted tail bound.

    Convergence needs s >= n*k_n + 1; the outer quadrature is implemented
    for n <= 3. The tail constant is fitted by comparing the U/2 and U
    truncations against the U^{n - s/k_n} decay shape.
    """
    n = system.n
    kn = system.k.max_degree
    if system.s <= n * kn:
        raise PreconditionError(
            f"singular integral needs s > n*k_n = {n * kn}, got s = {system.s}"
        )
    if n > 3:
        raise PreconditionError("outer quadrature implemented for n <= 3 only")
    if U <= 0:
        raise InputError(f"U = {U} must be positive")
    value_fn = {
        1: _si_truncated_value_1d,
        2: _si_truncated_value_2d,
        3: _si_truncated_value_3d,
    }[n]
    v_half, e_half, ev1 = value_fn(system, U / 2, tol, max_evals)
    v_full, e_full, ev2 = value_fn(system, U, tol, max_evals)
    gamma = n - system.s / kn
    denom = (U / 2) ** gamma - U**gamma  # positive since gamma < 0
    c_fit = abs(v_full - v_half) / denom if denom > 0 else 0.0
    tail = c_fit * U**gamma
    return SingularIntegral(
        value=v_full,
        quad_error=e_full + e_half,
        tail_bound=tail,
        evaluations=ev1 + ev2,
        route=ROUTE_TRUNCATED,
        param=float(U),
    )


def evaluate_forms_float(system: DiagonalSystem, pts: np.ndarray) -> np.ndarray:
    """F(t) for a (M, s) float matrix of points; returns (M, n)."""
    out = np.zeros((pts.shape[0], system.n))
    for i, ki in enumerate(system.k):
        acc = np.zeros(pts.shape[0])
        for j in range(system.s):
            acc += system.u[i][j] * pts[:, j] ** ki
        out[:, i] = acc
    return out


_MC_BLOCK = 1 << 16


def singular_integral_smoothed(
    system: DiagonalSystem,
    T: float,
    samples: int,
    seed: int = 0,
    threads: int = 1,
) -> SingularIntegral:
    """Fejer-smoothed Monte-Carlo estimate of the singular integral.

    Estimates the t-space integral of T^n * prod_i max(0, 1 - T|F_i(t)|)
    over [-1,1]^s (a nonnegative integrand). Sampling is split into fixed
    blocks with per-block jumped Philox streams, so the estimate is
    bit-identical for any thread count.
    """
    if T < 1:
        raise PreconditionError(f"smoothing parameter T = {T} must be >= 1")
    if samples <= 0:
        raise InputError("samples must be positive")
    base = np.random.Philox(key=seed)
    nblocks = (samples + _MC_BLOCK - 1) // _MC_BLOCK

    def run_block(b):
        size = min(_MC_BLOCK, samples - b * _MC_BLOCK)
        rng = np.random.Generator(base.jumped(b))
        pts = rng.uniform(-1.0, 1.0, size=(size, system.s))
        vals = evaluate_forms_float(system, pts)
        w = np.prod(np.maximum(0.0, 1.0 - T * np.abs(vals)), axis=1) * T**system.n
        return float(w.sum()), float((w * w).sum())

    if threads and threads > 1 and nblocks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_block, range(nblocks)))
    else:
        results = [run_block(b) for b in range(nblocks)]
    s1 = math.fsum(r[0] for r in results)
    s2 = math.fsum(r[1] for r in results)
    mean = s1 / samples
    var = max(0.0, s2 / samples - mean * mean)
    vol = 2.0**system.s
    value = vol * mean
    stderr = vol * math.sqrt(var / samples)
    return SingularIntegral(
        value=value,
        quad_error=stderr,
        tail_bound=0.0,
        evaluations=samples,
        route=ROUTE_SMOOTHED,
        param=float(T),
    )


@dataclass(frozen=True)
class RealCertificate:
    """Evidence of a real nonsingular zero inside [-1,1]^s."""

    eta: tuple[float, ...]
    residual: float  # max_i |F_i(eta)| / (s * sup-norm)
    jacobian_sigma_min: float
    minor_columns: tuple[int, ...]  # 1-based


def _jacobian(system: DiagonalSystem, x: np.ndarray) -> np.ndarray:
    J = np.zeros((system.n, system.s))
    for i, ki in enumerate(system.k):
        for j in range(system.s):
            J[i, j] = system.u[i][j] * ki * x[j] ** (ki - 1)
    return J


def _greedy_pivot_columns(J: np.ndarray) -> list[int]:
    """Greedy column pivoting: repeatedly take the column with the largest
    residual norm after orthogonalizing against the chosen ones."""
    n, s = J.shape
    R = J.copy()
    chosen: list[int] = []
    for _ in range(n):
        norms = np.linalg.norm(R, axis=0)
        norms[chosen] = -1.0
        jbest = int(np.argmax(norms))
        chosen.append(jbest)
        col = R[:, jbest]
        nrm = np.linalg.norm(col)
        if nrm == 0:
            continue
        q = col / nrm
        R -= np.outer(q, q @ R)
    return sorted(chosen)


def real_nonsingular_search(
    system: DiagonalSystem,
    attempts: int = 200,
    seed: int = 0,
    residual_tol: float = 1e-8,
    sigma_min_tol: float = 1e-6,
) -> RealCertificate | None:
    """Random restarts plus damped Newton on n chosen coordinates.

    Returns a certificate or None after the attempt budget. None is not a
    proof of real insolubility, only a failed search.
    """
    if system.s < system.n:
        raise PreconditionError("need s >= n for an n-coordinate Newton step")
    rng = np.random.Generator(np.random.Philox(key=seed))
    scale = system.s * system.sup_norm()
    for _ in range(attempts):
        x = rng.uniform(-1.0, 1.0, size=system.s)
        for _ in range(80):
            Fv = evaluate_forms_float(system, x[None, :])[0]
            if np.linalg.norm(Fv) < 1e-14 * scale:
                break
            J = _jacobian(system, x)
            cols = _greedy_pivot_columns(J)
            Jm = J[:, cols]
            try:
                delta = np.linalg.solve(Jm, -Fv)
            except np.linalg.LinAlgError:
                break
            if not np.all(np.isfinite(delta)):
                break
            base_norm = np.linalg.norm(Fv)
            lam = 1.0
            accepted = False
            for _ in range(12):
                xt = x.copy()
                xt[cols] += lam * delta
                m = np.max(np.abs(xt))
                if m > 1.0:
                    xt = xt / m  # zero set is a cone; pull back into the box
                Ft = evaluate_forms_float(system, xt[None, :])[0]
                if np.linalg.norm(Ft) < (1.0 - 0.25 * lam) * base_norm:
                    x = xt
                    accepted = True
                    break
                lam *= 0.5
            if not accepted:
                break
        if np.max(np.abs(x)) < 1e-3:
            continue  # collapsed toward the (singular) origin
        x = x / (2.0 * np.max(np.abs(x)))  # canonical sup-norm 1/2 representative
        Fv = evaluate_forms_float(system, x[None, :])[0]
        residual = float(np.max(np.abs(Fv)) / scale)
        if residual > residual_tol:
            continue
        J = _jacobian(system, x)
        cols = _greedy_pivot_columns(J)
        smin = float(np.linalg.svd(J[:, cols], compute_uv=False).min())
        if smin <= sigma_min_tol:
            continue
        return RealCertificate(
            eta=tuple(float(v) for v in x),
            residual=residual,
            jacobian_sigma_min=smin,
            minor_columns=tuple(c + 1 for c in cols),
        )
    return None
