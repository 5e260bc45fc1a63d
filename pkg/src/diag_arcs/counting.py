"""Exact integer counting for diagonal systems and Vinogradov-type moments.

Two independent routes are kept deliberately separate so they can check
each other:

* brute force - enumerate the full box, chunked so memory stays bounded;
* meet-in-the-middle - hash/join the exact partial value vectors of two
  variable blocks; no probabilistic hashing, the join key is the exact
  integer vector (packed bijectively into int64 when the value ranges
  provably allow it, with an arbitrary-precision fallback otherwise).

Counts are Python ints (arbitrary precision); int64 fast paths are only
taken when a priori bounds prove they cannot overflow.
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .budget import Budget, default_budget
from .errors import InputError, PreconditionError
from .forms import DiagonalSystem, ExponentTuple

_INT64_SAFE = 2**62


@dataclass(frozen=True)
class CountReport:
    count: int
    method: str  # "brute" | "mim"
    X: int
    wall_time: float
    memory_peak: int  # bytes, approximate


@dataclass(frozen=True)
class MomentSpec:
    """Even moment of order 2b of the exponential sum attached to k.

    box  "symmetric": variables range over [-X, X]
         "positive":  variables range over [1, X]
    """

    b: int
    k: ExponentTuple
    box: str = "symmetric"

    def __post_init__(self):
        if self.b < 1:
            raise InputError(f"moment half-order b = {self.b} must be >= 1")
        if self.box not in ("symmetric", "positive"):
            raise InputError(f"box must be 'symmetric' or 'positive', got {self.box!r}")
        if not isinstance(self.k, ExponentTuple):
            object.__setattr__(self, "k", ExponentTuple(tuple(self.k)))


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares growth fit of a moment against X."""

    X_list: tuple[int, ...]
    counts: tuple[int, ...]
    slope: float
    ratios: tuple[float, ...]  # count / (X^b + X^{2b - sigma})
    fitted_constant: float  # max of ratios


def _partial_sums(system: DiagonalSystem, X: int, var_indices: Sequence[int]):
    """Flat arrays of partial form values over the block's full sub-box.

    Returns a list of n int64 arrays of length (2X+1)**len(var_indices),
    component i holding sum_{j in block} u[i][j] * x_j**k_i with the block
    variables in row-major order (first index slowest).
    """
    xs = np.arange(-X, X + 1, dtype=np.int64)
    arrs = [np.zeros(1, dtype=np.int64) for _ in range(system.n)]
    for j in var_indices:
        for i, ki in enumerate(system.k):
            contrib = system.u[i][j - 1] * xs**ki
            arrs[i] = (arrs[i][:, None] + contrib[None, :]).ravel()
    return arrs


def _int64_value_bound(system: DiagonalSystem, X: int) -> int:
    return max(
        sum(abs(system.u[i][j]) * X ** system.k[i] for j in range(system.s))
        for i in range(system.n)
    )


def _pack_or_none(arrs, max_abs):
    """Bijectively pack n int64 component arrays into one int64 key array.

    max_abs[i] bounds |component i|; returns None when the combined range
    cannot be proven to fit int64 (caller then uses the exact dict path).
    """
    strides = []
    total = 1
    for m in max_abs:
        width = 2 * m + 1
        strides.append(total)
        total *= width
    if total >= _INT64_SAFE:
        return None
    key = np.zeros_like(arrs[0])
    for arr, m, stride in zip(arrs, max_abs, strides):
        key += (arr + m) * stride
    return key


def count_zeros_brute(
    system: DiagonalSystem,
    X: int,
    budget: Budget | None = None,
    threads: int = 1,
) -> CountReport:
    """Exact #{x in [-X,X]^s : F(x) = 0} by full enumeration."""
    if X < 0:
        raise InputError(f"X = {X} must be >= 0")
    budget = budget or default_budget()
    t0 = time.perf_counter()
    W = 2 * X + 1
    total = W**system.s
    budget.check_tuples(
        total, f"brute count for {system.name or 'system'} at X={X}",
        hint="use count_zeros_mim",
    )
    if _int64_value_bound(system, X) >= _INT64_SAFE:
        count = _count_zeros_python(system, X)
        return CountReport(count, "brute", X, time.perf_counter() - t0, 0)

    # Trailing block vectorized; leading variables looped in Python.
    d = system.s
    while d > 1 and W**d * (system.n + 1) * 8 > budget.bytes // 4:
        d -= 1
    lead_vars = list(range(1, system.s - d + 1))
    trail_vars = list(range(system.s - d + 1, system.s + 1))
    trail = _partial_sums(system, X, trail_vars)
    mem = sum(a.nbytes for a in trail)

    leads = list(itertools.product(range(-X, X + 1), repeat=len(lead_vars)))

    def chunk_count(chunk):
        c = 0
        for lead in chunk:
            mask = None
            for i, ki in enumerate(system.k):
                lead_val = sum(
                    system.u[i][j - 1] * lead[jj] ** ki
                    for jj, j in enumerate(lead_vars)
                )
                m = trail[i] == -lead_val
                mask = m if mask is None else (mask & m)
            c += int(np.count_nonzero(mask))
        return c

    nchunks = 32 if len(leads) >= 32 else 1  # fixed split: thread-count invariant
    chunks = [leads[i::nchunks] for i in range(nchunks)]
    if threads and threads > 1 and nchunks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            count = sum(pool.map(chunk_count, chunks))
    else:
        count = sum(chunk_count(c) for c in chunks)
    return CountReport(count, "brute", X, time.perf_counter() - t0, mem)


def _count_zeros_python(system: DiagonalSystem, X: int) -> int:
    count = 0
    for x in itertools.product(range(-X, X + 1), repeat=system.s):
        if all(v == 0 for v in system.evaluate(list(x))):
            count += 1
    return count


def default_split(s: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    half = (s + 1) // 2
    return tuple(range(1, half + 1)), tuple(range(half + 1, s + 1))


def count_zeros_mim(
    system: DiagonalSystem,
    X: int,
    split: tuple[Sequence[int], Sequence[int]] | None = None,
    budget: Budget | None = None,
    threads: int = 1,
) -> CountReport:
    """Exact zero count via meet-in-the-middle over a variable split.

    Hashes the n-dimensional partial value vector of block 1 and joins it
    against the negated block-2 vectors. Equals count_zeros_brute exactly.
    """
    if X < 0:
        raise InputError(f"X = {X} must be >= 0")
    budget = budget or default_budget()
    t0 = time.perf_counter()
    if split is None:
        split = default_split(system.s)
    block1, block2 = (tuple(split[0]), tuple(split[1]))
    if not block1 or not block2:
        raise PreconditionError("both split blocks must be nonempty")
    if sorted(block1 + block2) != list(range(1, system.s + 1)):
        raise PreconditionError(
            f"split {split} is not a partition of 1..{system.s}"
        )
    W = 2 * X + 1
    big = max(len(block1), len(block2))
    budget.check_tuples(W**big, f"MIM half-enumeration at X={X}")
    need = (W ** len(block1) + W ** len(block2)) * (system.n + 1) * 8
    budget.check_bytes(need, f"MIM partial tables at X={X}")

    if _int64_value_bound(system, X) >= _INT64_SAFE:
        count = _mim_python(system, X, block1, block2)
        return CountReport(count, "mim", X, time.perf_counter() - t0, 0)

    max_abs = [
        sum(abs(system.u[i][j]) * X ** system.k[i] for j in range(system.s))
        for i in range(system.n)
    ]
    arrs1 = _partial_sums(system, X, block1)
    arrs2 = _partial_sums(system, X, block2)
    mem = sum(a.nbytes for a in arrs1 + arrs2)
    key1 = _pack_or_none(arrs1, max_abs)
    key2 = _pack_or_none([-a for a in arrs2], max_abs)
    if key1 is None or key2 is None:
        count = _join_dict(arrs1, arrs2)
    else:
        mem += key1.nbytes + key2.nbytes
        u1, c1 = np.unique(key1, return_counts=True)
        u2, c2 = np.unique(key2, return_counts=True)
        common, i1, i2 = np.intersect1d(
            u1, u2, assume_unique=True, return_indices=True
        )
        if W**system.s < _INT64_SAFE:
            count = int(np.dot(c1[i1], c2[i2]))
        else:
            count = sum(int(a) * int(b) for a, b in zip(c1[i1], c2[i2]))
    return CountReport(count, "mim", X, time.perf_counter() - t0, mem)


def _join_dict(arrs1, arrs2) -> int:
    table: dict[tuple, int] = {}
    for row in zip(*(a.tolist() for a in arrs1)):
        table[row] = table.get(row, 0) + 1
    count = 0
    for row in zip(*(a.tolist() for a in arrs2)):
        neg = tuple(-v for v in row)
        if neg in table:
            count += table[neg]
    return count


def _mim_python(system, X, block1, block2) -> int:
    def partials(block):
        out = {}
        for xs in itertools.product(range(-X, X + 1), repeat=len(block)):
            key = tuple(
                sum(
                    system.u[i][j - 1] * xs[jj] ** ki
                    for jj, j in enumerate(block)
                )
                for i, ki in enumerate(system.k)
            )
            out[key] = out.get(key, 0) + 1
        return out

    t1 = partials(block1)
    count = 0
    for key, mult in partials(block2).items():
        neg = tuple(-v for v in key)
        if neg in t1:
            count += t1[neg] * mult
    return count


def _vinogradov_window(b: int, k_max: int, lo: int, hi: int, budget: Budget) -> int:
    """#{x in [lo,hi]^{2b} : sum of j-th powers agrees between halves, j<=k_max}.

    Pure-Python multiplicity count: reference-grade, exact, independent of
    the numpy packing machinery used by moment_count.
    """
    width = hi - lo + 1
    if width < 1:
        raise InputError(f"empty window [{lo},{hi}]")
    budget.check_tuples(width**b, f"Vinogradov half-enumeration over [{lo},{hi}]")
    mult: dict[tuple, int] = {}
    for xs in itertools.product(range(lo, hi + 1), repeat=b):
        key = tuple(sum(x**j for x in xs) for j in range(1, k_max + 1))
        mult[key] = mult.get(key, 0) + 1
    return sum(m * m for m in mult.values())


def vinogradov_count(
    b: int, k_max: int, X: int, budget: Budget | None = None
) -> int:
    """Exact J_{b,k_max}(X): solutions of the full power-sum system on [1,X]."""
    if b < 1 or k_max < 1 or X < 1:
        raise InputError("b, k_max and X must all be >= 1")
    budget = budget or default_budget()
    return _vinogradov_window(b, k_max, 1, X, budget)


def translation_invariance_check(
    b: int, k_max: int, X: int, c: int, budget: Budget | None = None
) -> bool:
    """Vinogradov count over [1+c, X+c] equals the count over [1, X]."""
    budget = budget or default_budget()
    base = _vinogradov_window(b, k_max, 1, X, budget)
    shifted = _vinogradov_window(b, k_max, 1 + c, X + c, budget)
    return base == shifted


def moment_count(spec: MomentSpec, X: int, budget: Budget | None = None) -> int:
    """Exact 2b-th moment of f_k over the chosen box.

    Computed as the number of solutions of the b-vs-b power-sum system by
    Fourier orthogonality; no numerical integration is involved.
    """
    if X < 1:
        raise InputError(f"X = {X} must be >= 1")
    budget = budget or default_budget()
    if spec.box == "symmetric":
        xs = np.arange(-X, X + 1, dtype=np.int64)
    else:
        xs = np.arange(1, X + 1, dtype=np.int64)
    width = len(xs)
    budget.check_tuples(width**spec.b, f"moment half-enumeration at X={X}")
    n = spec.k.n
    max_abs = [spec.b * X**ki for ki in spec.k]
    if max(max_abs) >= _INT64_SAFE:
        return _moment_python(spec, X)
    arrs = [np.zeros(1, dtype=np.int64) for _ in range(n)]
    for _ in range(spec.b):
        for i, ki in enumerate(spec.k):
            arrs[i] = (arrs[i][:, None] + (xs**ki)[None, :]).ravel()
    key = _pack_or_none(arrs, max_abs)
    if key is None:
        mult: dict[tuple, int] = {}
        for row in zip(*(a.tolist() for a in arrs)):
            mult[row] = mult.get(row, 0) + 1
        return sum(m * m for m in mult.values())
    _, counts = np.unique(key, return_counts=True)
    if width ** (2 * spec.b) < _INT64_SAFE:
        return int(np.dot(counts, counts))
    return sum(int(m) * int(m) for m in counts)


def _moment_python(spec: MomentSpec, X: int) -> int:
    rng = range(-X, X + 1) if spec.box == "symmetric" else range(1, X + 1)
    mult: dict[tuple, int] = {}
    for xs in itertools.product(rng, repeat=spec.b):
        key = tuple(sum(x**ki for x in xs) for ki in spec.k)
        mult[key] = mult.get(key, 0) + 1
    return sum(m * m for m in mult.values())


def exponent_fit(
    spec: MomentSpec, X_list: Sequence[int], budget: Budget | None = None
) -> ExponentFit:
    """Fit log(moment) against log X and report bound ratios.

    ratios[i] = count_i / (X^b + X^{2b - sigma(k)}), the conjectured size;
    the max ratio doubles as a fitted constant for the bound.
    """
    X_list = tuple(X_list)
    if len(X_list) < 3:
        raise PreconditionError("exponent_fit needs at least 3 sample points")
    if any(X_list[i] >= X_list[i + 1] for i in range(len(X_list) - 1)):
        raise InputError("X_list must be strictly increasing")
    counts = tuple(moment_count(spec, X, budget) for X in X_list)
    logx = np.log([float(x) for x in X_list])
    logc = np.log([float(c) for c in counts])
    slope = float(np.polyfit(logx, logc, 1)[0])
    sigma = sum(spec.k.k)
    ratios = tuple(
        c / (X**spec.b + float(X) ** (2 * spec.b - sigma))
        for c, X in zip(counts, X_list)
    )
    return ExponentFit(X_list, counts, slope, ratios, max(ratios))
