"""Membership predicates for the refined (1,3,5) minor-arc regions.

All comparisons are exact rational arithmetic: irrational thresholds like
X^{1/8}/(q X^5) are compared by raising both sides to the 8th power, so a
sweep is reproducible bit-for-bit. alpha_3-type predicates quantify over
rational approximations of 5*alpha and are decided from the continued
fraction of 5*alpha (convergents and semiconvergents enumerate every
admissible candidate); the alpha_2-type predicates use Dirichlet-quality
approximations, matching the constructions the covering argument needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .arcs import (
    ArcParams,
    approx_candidates,
    arc_params,
    classify,
    integer_root,
    _exact,
)
from .errors import InputError
from .forms import ExponentTuple

K135 = ExponentTuple((1, 3, 5))


def _q_bound_m3(X: int) -> int:
    """Largest q with 5q <= X^{1/8}, i.e. (5q)^8 <= X."""
    q = integer_root(X, 8) // 5 + 2
    while q >= 1 and (5 * q) ** 8 > X:
        q -= 1
    return max(q, 0)


def in_m3(alpha3, X: int) -> bool:
    """No Dirichlet-quality (b,q) for 5*alpha with q <= X^{1/8}/5.

    The quantifier runs over |5 alpha - b/q| <= X^{1/8}/(q X^5) (the
    approximation quality the covering construction produces); the naive
    1/q^2 reading would let the trivial (nearest integer, q=1) pair empty
    the whole set as soon as X >= 5^8. Candidates are enumerated from the
    continued fraction of 5*alpha, semiconvergents included.
    """
    theta = 5 * _exact(alpha3)
    bound = _q_bound_m3(X)
    if bound < 1:
        return True
    for b, q in approx_candidates(theta, bound):
        diff = abs(theta - Fraction(b, q))
        # |diff| <= X^{1/8} / (q X^5)  <=>  (diff q X^5)^8 <= X
        if (diff * q * X**5) ** 8 <= X:
            return False
    return True


def _scan_interval_union(alpha, X: int, qmax: int, radius_fn, exact_test) -> bool:
    """Generic 'is alpha inside some [b/q +- r(q)] interval' scan.

    Float prefilter over all q at once, then exact rational confirmation
    of the few candidates; never misses (the prefilter margin dominates
    float error by many orders) and never accepts without exact proof.
    """
    if qmax < 1:
        return False
    af = float(alpha)
    qs = np.arange(1, qmax + 1, dtype=float)
    bs = np.rint(af * qs)
    diffs = np.abs(af - bs / qs)
    radii = radius_fn(qs)
    cand = np.nonzero(diffs <= radii * (1.0 + 1e-9) + 1e-13)[0]
    if len(cand) == 0:
        return False
    a = _exact(alpha)
    for idx in cand:
        q = int(qs[idx])
        for b in {math.floor(a * q), math.ceil(a * q)}:
            if not (1 <= b <= q and math.gcd(b, q) == 1):
                continue
            if exact_test(abs(a - Fraction(b, q)), q):
                return True
    return False


def in_W3(alpha3, X: int) -> bool:
    """alpha within X^{1/8}/(q X^5) of some b/q, b in A_1(q), q <= X^{1/8}."""
    qmax = integer_root(X, 8)
    return _scan_interval_union(
        alpha3,
        X,
        qmax,
        lambda qs: float(X) ** 0.125 / (qs * float(X) ** 5),
        # |diff| <= X^{1/8} / (q X^5)  <=>  (diff q X^5)^8 <= X
        lambda diff, q: (diff * q * X**5) ** 8 <= X,
    )


def _q_bound_34(X: int) -> int:
    """floor(X^{3/4}) exactly."""
    return integer_root(X**3, 4)


def in_m2(alpha2, X: int) -> bool:
    """No Dirichlet-quality (b,q): q <= X^{3/4}, |alpha - b/q| <= X^{3/4}/(q X^3).

    This is the operative quantifier of the covering construction (the
    complement then lands inside the W2 interval union by construction).
    """
    a = _exact(alpha2)
    bound = _q_bound_34(X)
    if bound < 1:
        return True
    for b, q in approx_candidates(a, bound):
        diff = abs(a - Fraction(b, q))
        # |diff| <= X^{3/4} / (q X^3)  <=>  (diff q X^3)^4 <= X^3
        if (diff * q * X**3) ** 4 <= X**3:
            return False
    return True


def in_W2(alpha2, X: int) -> bool:
    """alpha within X^{3/4}/(q X^3) of some b/q, b in A_1(q), q <= X^{3/4}.

    Independent direct scan over q (not via continued fractions), so the
    complement-inclusion test exercises two different code paths.
    """
    qmax = _q_bound_34(X)
    return _scan_interval_union(
        alpha2,
        X,
        qmax,
        lambda qs: float(X) ** 0.75 / (qs * float(X) ** 3),
        lambda diff, q: (diff * q * X**3) ** 4 <= X**3,
    )


def _h_of(q: int, a: Sequence[int], w: Sequence[int]) -> int:
    g = math.gcd(q, *[wi * ai for wi, ai in zip(w, a)])
    return q // g


def in_L(alpha: Sequence, X: int, w: Sequence[int]):
    """Membership in the pruning union L = union of L(q, a) boxes.

    Returns (True, q, a) for the smallest admissible q, or (False, None,
    None). The box L(q,a) bounds |alpha_1 - a_1/q| by 1/(2|w_1| h(q,a,w))
    and the other coordinates by M0 X^{7/8} / (q X^{k_i}).
    """
    M0 = 1
    for wi in w:
        if wi == 0:
            raise InputError("w must have nonzero entries")
        M0 *= abs(int(wi))
    av = [_exact(x) for x in alpha]
    # q <= M0 X^{7/8}  <=>  q^8 <= M0^8 X^7
    qmax = integer_root(M0**8 * X**7, 8)
    for q in range(1, qmax + 1):
        cands = []
        for x in av:
            lo = math.floor(x * q)
            b = lo if x * q - lo <= Fraction(1, 2) else lo + 1
            cands.append(min(max(b, 1), q))
        a = tuple(cands)
        if math.gcd(q, *a) != 1:
            continue
        h = _h_of(q, a, w)
        if abs(av[0] - Fraction(a[0], q)) > Fraction(1, 2 * abs(w[0]) * h):
            continue
        ok = True
        for i, ki in ((1, 3), (2, 5)):
            diff = abs(av[i] - Fraction(a[i], q))
            # |diff| <= M0 X^{7/8} / (q X^{k_i}) <=> (diff q X^{k_i})^8 <= M0^8 X^7
            if (diff * q * X**ki) ** 8 > M0**8 * X**7:
                ok = False
                break
        if ok:
            return True, q, a
    return False, None, None


@dataclass(frozen=True)
class RegionFlags:
    in_m3: bool
    in_W3: bool
    in_m2: bool
    in_W2: bool
    in_L: bool
    L_q: int | None
    L_a: tuple[int, ...] | None
    is_minor: bool
    in_n1: bool
    in_n2: bool
    in_n3: bool


def _reduce_to_box(value: Fraction, params: ArcParams) -> Fraction:
    y = value - math.floor(value)
    if y < Fraction(1, params.Q0):
        y += 1
    return y


def region_135(
    alpha: Sequence,
    X: int,
    w: Sequence[int],
    tau=Fraction(5, 8),
    include_L: bool = True,
) -> RegionFlags:
    """All region memberships for one point, k = (1,3,5) fixed.

    The m/W flags are evaluated on the raw coordinates (alpha_2, alpha_3);
    the n_j flags follow the covering decomposition: the point must be
    minor, and membership is decided on w tensor alpha reduced mod 1 into
    the shifted box. The pruning-union scan (in_L) is the expensive flag
    and can be skipped.
    """
    if len(alpha) != 3 or len(w) != 3:
        raise InputError("region_135 needs a real triple and an integer triple")
    params = arc_params(X, tau, K135)
    av = [_exact(x) for x in alpha]
    label = classify(params, K135, av)
    minor = not label.is_major

    m3 = in_m3(av[2], X)
    w3 = in_W3(av[2], X)
    m2 = in_m2(av[1], X)
    w2 = in_W2(av[1], X)
    if include_L:
        lmem, lq, la = in_L(av, X, w)
    else:
        lmem, lq, la = False, None, None

    y = [_reduce_to_box(wi * x, params) for wi, x in zip(w, av)]
    n3 = minor and in_m3(y[2], X)
    n2 = minor and in_m2(y[1], X) and in_W3(y[2], X)
    n1 = minor and in_W2(y[1], X) and in_W3(y[2], X)
    return RegionFlags(
        in_m3=m3,
        in_W3=w3,
        in_m2=m2,
        in_W2=w2,
        in_L=lmem,
        L_q=lq,
        L_a=la,
        is_minor=minor,
        in_n1=n1,
        in_n2=n2,
        in_n3=n3,
    )
