"""Panel-based adaptive quadrature on a Gauss-Kronrod 7/15 pair.

The integrators here are built for unit-modulus oscillatory integrands
e(g(t)) with polynomial g: the initial partition bounds the phase travel
per panel by about one period (per monomial), after which bisection driven
by the Kronrod-minus-Gauss error estimate cleans up the remainder. All
reductions run in fixed panel order, so results are deterministic.
"""

from __future__ import annotations

import numpy as np

from .errors import QuadratureError

# 15-point Kronrod nodes on [-1,1] with embedded 7-point Gauss rule
# (Gauss nodes sit at indices 1, 3, 5, 7, 9, 11, 13).
_XGK = np.array(
    [
        0.991455371120813,
        0.949107912342759,
        0.864864423359769,
        0.741531185599394,
        0.586087235467691,
        0.405845151377397,
        0.207784955007898,
        0.0,
    ]
)
_WGK = np.array(
    [
        0.022935322010529,
        0.063092092629979,
        0.104790010322250,
        0.140653259715525,
        0.169004726639267,
        0.190350578064785,
        0.204432940075298,
        0.209482141084728,
    ]
)
_WG = np.array(
    [
        0.129484966168870,
        0.279705391489277,
        0.381830050505119,
        0.417959183673469,
    ]
)

NODES15 = np.concatenate([-_XGK[:7], [0.0], _XGK[6::-1]])
WEIGHTS_K15 = np.concatenate([_WGK[:7], [_WGK[7]], _WGK[6::-1]])
WEIGHTS_G7 = np.zeros(15)
WEIGHTS_G7[1:14:2] = np.concatenate([_WG[:3], [_WG[3]], _WG[2::-1]])


def panel_points(edges: np.ndarray) -> np.ndarray:
    """(P, 15) matrix of Kronrod nodes for consecutive panels of `edges`."""
    a = edges[:-1]
    b = edges[1:]
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    return c[:, None] + h[:, None] * NODES15[None, :]


def phase_equidistributed_edges(
    monomials, lo: float = -1.0, hi: float = 1.0, density: float = 1.0,
    max_panels: int = 4_000_000,
) -> np.ndarray:
    """Panel edges so each monomial travels <= 1/density periods per panel.

    monomials: iterable of (degree, |coefficient|) in e-units, i.e. the
    phase is sum of coeff * t**degree inside e(.). Only |t| <= 1 windows
    are supported (edges are placed where |c| * |t|**k crosses multiples
    of 1/density).
    """
    assert -1.0 <= lo < hi <= 1.0
    cuts = [lo, hi]
    if lo < 0.0 < hi:
        cuts.append(0.0)
    total = 0.0
    for k, c in monomials:
        c = abs(c)
        total += 2 * c * density
        if c * density <= 1.0:
            continue
        m = int(np.ceil(c * density))
        if m > max_panels:
            raise QuadratureError(
                f"oscillation needs ~{m} panels, above cap {max_panels}"
            )
        levels = (np.arange(1, m) / m) ** (1.0 / k)
        for t in np.concatenate([-levels, levels]):
            if lo < t < hi:
                cuts.append(float(t))
    edges = np.unique(np.asarray(cuts))
    if len(edges) - 1 > max_panels:
        raise QuadratureError(
            f"{len(edges) - 1} initial panels exceed cap {max_panels}"
        )
    return edges


def adaptive_panels(
    fvec,
    edges: np.ndarray,
    tol_abs: float,
    max_evals: int = 50_000_000,
    max_rounds: int = 30,
):
    """Adaptive GK7/15 integration over an initial partition.

    fvec maps a flat array of points to complex values. Returns
    (value, error_estimate, evaluations); raises QuadratureError carrying
    the best estimate if the budget runs out first.
    """
    edges = np.asarray(edges, dtype=float)
    evals = 0

    def rule(es):
        nonlocal evals
        pts = panel_points(es)
        h = 0.5 * (es[1:] - es[:-1])
        y = np.asarray(fvec(pts.ravel())).reshape(pts.shape)
        evals += pts.size
        ik = h * (y @ WEIGHTS_K15)
        ig = h * (y @ WEIGHTS_G7)
        return ik, np.abs(ik - ig)

    ik, err = rule(edges)
    for _ in range(max_rounds):
        total_err = float(err.sum())
        if total_err <= tol_abs:
            break
        if evals >= max_evals:
            raise QuadratureError(
                f"quadrature budget exhausted ({evals} evaluations), "
                f"error estimate {total_err:.3e} > tol {tol_abs:.3e}",
                best_value=complex(ik.sum()),
                error_estimate=total_err,
            )
        # split every panel holding more than its fair share of the error
        share = max(tol_abs / (2 * len(err)), total_err / (8 * len(err)))
        bad = np.nonzero(err > share)[0]
        if len(bad) == 0:
            bad = np.array([int(np.argmax(err))])
        a = edges[bad]
        b = edges[bad + 1]
        mid = 0.5 * (a + b)
        sub_edges = np.empty(3 * len(bad))
        sub_edges[0::3] = a
        sub_edges[1::3] = mid
        sub_edges[2::3] = b
        new_ik = []
        new_err = []
        for i in range(len(bad)):
            es = sub_edges[3 * i : 3 * i + 3]
            sik, serr = rule(es)
            new_ik.append(sik)
            new_err.append(serr)
        # rebuild arrays in position order
        keep = np.ones(len(err), dtype=bool)
        keep[bad] = False
        pieces_e = []
        pieces_ik = []
        pieces_err = []
        bi = 0
        for p in range(len(err)):
            pieces_e.append(edges[p])
            if keep[p]:
                pieces_ik.append(ik[p : p + 1])
                pieces_err.append(err[p : p + 1])
            else:
                pieces_e.append(0.5 * (edges[p] + edges[p + 1]))
                pieces_ik.append(new_ik[bi])
                pieces_err.append(new_err[bi])
                bi += 1
        pieces_e.append(edges[-1])
        edges = np.asarray(pieces_e)
        ik = np.concatenate(pieces_ik)
        err = np.concatenate(pieces_err)
    else:
        total_err = float(err.sum())
        if total_err > tol_abs:
            raise QuadratureError(
                f"quadrature failed to converge in {max_rounds} rounds, "
                f"error estimate {total_err:.3e} > tol {tol_abs:.3e}",
                best_value=complex(ik.sum()),
                error_estimate=total_err,
            )
    return complex(ik.sum()), float(err.sum()), evals


def uniform_edges(lo: float, hi: float, panels: int) -> np.ndarray:
    return np.linspace(lo, hi, max(1, int(panels)) + 1)
