"""Batch command-line front end.

Every report starts with a reproducibility header (seed, budgets, command
parameters) followed by a flat table; CSV is the default, JSON mirrors the
same numbers exactly (floats are emitted with 17 significant digits, ints
with exact digits, so the two formats round-trip losslessly). Timing
columns are suppressed by --no-timing so reports are byte-comparable.

Exit codes: 0 success (a not-found certificate is still success),
1 input error, 2 budget error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources

from . import __version__
from .budget import default_budget
from .counting import (
    MomentSpec,
    count_zeros_brute,
    count_zeros_mim,
    exponent_fit,
    moment_count,
    translation_invariance_check,
    vinogradov_count,
)
from .errors import BudgetError, DiagArcsError, InputError, PreconditionError
from .expsums import weyl_sum
from .forms import ExponentTuple, constants, load_system, validate_system
from .arcs import (
    arc_params,
    arcs_disjoint,
    classify,
    main_term,
    major_arc_integral,
    weyl_major_error,
)
from .oscillatory import (
    real_nonsingular_search,
    singular_integral_smoothed,
    singular_integral_truncated,
)
from .series import T_q, padic_sweep, series_truncated


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise InputError(message)


def fmt_number(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _emit(header: dict, columns: list[str], rows: list[dict], args) -> None:
    out = sys.stdout
    if args.format == "json":
        payload = {"header": header, "rows": rows}
        json.dump(payload, out, indent=2, sort_keys=True, default=fmt_number)
        out.write("\n")
        return
    for key in sorted(header):
        out.write(f"# {key}={fmt_number(header[key])}\n")
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(fmt_number(row.get(c, "")) for c in columns) + "\n")


def _base_header(args, command: str) -> dict:
    budget = default_budget(args.budget_tuples, args.budget_bytes)
    header = {
        "command": command,
        "version": __version__,
        "seed": args.seed,
        "threads": args.threads,
        "budget_tuples": budget.tuples,
        "budget_bytes": budget.bytes,
    }
    if getattr(args, "system", None):
        header["system"] = args.system
    return header


def _budget(args):
    return default_budget(args.budget_tuples, args.budget_bytes)


def _load(args):
    spec = args.system
    if spec.startswith("corpus:"):
        name = spec.split(":", 1)[1]
        ref = resources.files("diag_arcs").joinpath(f"corpus/{name}.json")
        with resources.as_file(ref) as path:
            return load_system(path)
    return load_system(spec)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v != ""]
    except ValueError:
        raise InputError(f"expected a comma-separated integer list, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v != ""]
    except ValueError:
        raise InputError(f"expected a comma-separated number list, got {text!r}")


def cmd_count(args):
    system = _load(args)
    budget = _budget(args)
    header = _base_header(args, "count")
    header["method"] = args.method
    columns = ["X", "count", "method"]
    if args.timing:
        columns += ["wall_time", "memory_peak"]
    rows = []
    for X in _int_list(args.X):
        W = 2 * X + 1
        method = args.method
        if method == "auto":
            method = "brute" if W**system.s <= budget.tuples else "mim"
        if method == "brute":
            rep = count_zeros_brute(system, X, budget, threads=args.threads)
        else:
            rep = count_zeros_mim(system, X, budget=budget, threads=args.threads)
        row = {"X": X, "count": rep.count, "method": rep.method}
        if args.timing:
            row["wall_time"] = rep.wall_time
            row["memory_peak"] = rep.memory_peak
        rows.append(row)
    return header, columns, rows


def _predict_factors(system, args, budget, header):
    n, kn = system.n, system.k.max_degree
    j_res = None
    s_res = None
    if system.s > n * kn and n <= 3:
        j_res = singular_integral_truncated(system, args.U, tol=args.tol)
        header["J_value"] = j_res.value
        header["J_error"] = j_res.error_bar()
    else:
        header["J_value"] = "unavailable"
        header["warning_J"] = f"needs s > n*k_n = {n * kn} and n <= 3"
    if system.s > (n + 1) * kn:
        s_res = series_truncated(system, args.Q_cut, budget=budget)
        header["S_value"] = s_res.partial_sum
        header["S_tail"] = s_res.tail_report
    else:
        header["S_value"] = "unavailable"
        header["warning_S"] = f"needs s > (n+1)*k_n = {(n + 1) * kn}"
    return j_res, s_res


def _certificates(system, args, header):
    cert = real_nonsingular_search(system, attempts=args.attempts, seed=args.seed)
    if cert is None:
        header["real_certificate"] = "not_found"
    else:
        header["real_certificate"] = (
            f"found residual={fmt_number(cert.residual)} "
            f"sigma_min={fmt_number(cert.jacobian_sigma_min)}"
        )
    sweep = padic_sweep(system, p_max=args.p_max, seed=args.seed)
    parts = []
    missing = 0
    for p in sorted(sweep):
        c = sweep[p]
        if c is None:
            parts.append(f"{p}:notfound")
            missing += 1
        else:
            parts.append(f"{p}:v{c.v_p}")
    header["padic_sweep"] = ";".join(parts)
    header["padic_missing"] = missing
    header["padic_note"] = "sweep is partial evidence (p <= p_max only)"


def cmd_predict(args):
    system = _load(args)
    budget = _budget(args)
    header = _base_header(args, "predict")
    cst = constants(system)
    header["sigma"] = cst.sigma
    header["eta0"] = str(cst.eta0)
    header["s_min_thm1"] = cst.s_min_thm1
    header["s_min_major"] = cst.s_min_major
    _certificates(system, args, header)
    j_res, s_res = _predict_factors(system, args, budget, header)
    columns = ["X", "main_term", "uncertainty", "exponent"]
    rows = []
    for X in _int_list(args.X):
        if j_res is None or s_res is None:
            rows.append(
                {"X": X, "main_term": "", "uncertainty": "",
                 "exponent": system.s - cst.sigma}
            )
            continue
        pred = main_term(system, X, j_res, s_res)
        rows.append(
            {
                "X": X,
                "main_term": pred.value,
                "uncertainty": pred.uncertainty,
                "exponent": pred.exponent,
            }
        )
    return header, columns, rows


def cmd_compare(args):
    system = _load(args)
    budget = _budget(args)
    header = _base_header(args, "compare")
    cst = constants(system)
    header["sigma"] = cst.sigma
    _certificates(system, args, header)
    j_res, s_res = _predict_factors(system, args, budget, header)
    columns = ["X", "count", "method", "main_term", "ratio"]
    do_arcs = args.tau is not None and system.n <= 3
    if do_arcs:
        header["arcs_tau"] = args.tau
        columns += ["major_integral_re", "major_integral_im"]
    rows = []
    for X in _int_list(args.X):
        W = 2 * X + 1
        method = "brute" if W**system.s <= min(budget.tuples, 10**8) else "mim"
        rep = (
            count_zeros_brute(system, X, budget, threads=args.threads)
            if method == "brute"
            else count_zeros_mim(system, X, budget=budget, threads=args.threads)
        )
        row = {"X": X, "count": rep.count, "method": rep.method}
        if j_res is not None and s_res is not None:
            pred = main_term(system, X, j_res, s_res)
            row["main_term"] = pred.value
            row["ratio"] = rep.count / pred.value if pred.value else ""
        else:
            row["main_term"] = ""
            row["ratio"] = ""
        if do_arcs:
            params = arc_params(X, args.tau, system.k)
            val = major_arc_integral(system, params)
            row["major_integral_re"] = val.real
            row["major_integral_im"] = val.imag
        rows.append(row)
    return header, columns, rows


def cmd_vmvt(args):
    budget = _budget(args)
    header = _base_header(args, "vmvt")
    header["b"] = args.b
    header["k_max"] = args.k_max
    columns = ["b", "k_max", "X", "J", "bound_ratio"]
    xs = _int_list(args.X)
    moment_k = None
    if args.moment_k:
        moment_k = ExponentTuple(tuple(_int_list(args.moment_k)))
        columns += ["moment", "moment_equals_J"]
    if args.shift is not None:
        columns += ["translation_invariant"]
    rows = []
    counts = []
    for X in xs:
        row = {"b": args.b, "k_max": args.k_max, "X": X}
        try:
            J = vinogradov_count(args.b, args.k_max, X, budget)
        except BudgetError as exc:
            row["J"] = f"budget:{exc}"
            rows.append(row)
            continue
        counts.append((X, J))
        sigma = args.k_max * (args.k_max + 1) // 2
        row["J"] = J
        row["bound_ratio"] = J / (X**args.b + float(X) ** (2 * args.b - sigma))
        if moment_k is not None:
            m = moment_count(MomentSpec(args.b, moment_k, "positive"), X, budget)
            row["moment"] = m
            row["moment_equals_J"] = m == J
        if args.shift is not None:
            row["translation_invariant"] = translation_invariance_check(
                args.b, args.k_max, X, args.shift, budget
            )
        rows.append(row)
    if len(counts) >= 3:
        import numpy as np

        lx = np.log([float(x) for x, _ in counts])
        lc = np.log([float(c) for _, c in counts])
        slope = float(np.polyfit(lx, lc, 1)[0])
        header["slope"] = slope
        for row in rows:
            if "J" in row and not isinstance(row["J"], str):
                row["slope"] = slope
        if "slope" not in columns:
            columns.append("slope")
    return header, columns, rows


def cmd_arcs(args):
    header = _base_header(args, "arcs")
    k = ExponentTuple(tuple(_int_list(args.k)))
    params = arc_params(args.X, args.tau, k)
    header["Q"] = params.Q
    header["Q0"] = params.Q0
    header["theorem_regime"] = params.theorem_regime
    if args.classify:
        alpha = _float_list(args.alpha)
        label = classify(params, k, alpha)
        columns = ["classification", "q", "a"]
        rows = [
            {
                "classification": label.classification,
                "q": label.q if label.q is not None else "",
                "a": ";".join(map(str, label.a)) if label.a else "",
            }
        ]
        return header, columns, rows
    disjoint = arcs_disjoint(params, k)
    return header, ["X", "tau", "Q", "disjoint"], [
        {"X": args.X, "tau": args.tau, "Q": params.Q, "disjoint": disjoint}
    ]


def cmd_weyl(args):
    header = _base_header(args, "weyl")
    if args.error_sweep:
        import numpy as np

        rng = np.random.Generator(np.random.Philox(key=args.seed))
        columns = ["k", "q", "X", "error", "budget", "ratio"]
        rows = []
        xs = _int_list(args.X)
        for X in xs:
            for _ in range(args.samples):
                q = int(rng.integers(1, args.q_max + 1))
                a = [int(rng.integers(0, q + 1)) for _ in range(args.k)]
                beta = _random_theorem3_beta(rng, args.k, q, X)
                rep = weyl_major_error(args.k, q, a, beta, X)
                rows.append(
                    {
                        "k": args.k,
                        "q": q,
                        "X": X,
                        "error": rep.error,
                        "budget": rep.budget,
                        "ratio": rep.error / rep.budget,
                    }
                )
        return header, columns, rows
    k = ExponentTuple(tuple(_int_list(args.k_tuple)))
    alpha = _float_list(args.alpha)
    val = weyl_sum(k, alpha, args.X)
    return header, ["X", "re", "im"], [{"X": args.X, "re": val.real, "im": val.imag}]


def _random_theorem3_beta(rng, k_deg, q, X):
    """beta meeting Theorem 3's hypothesis with room to spare."""
    beta = [0.0] * k_deg
    beta[0] = float(rng.uniform(-1, 1)) / (2 * q) * 0.9
    if k_deg > 1:
        # split the 1/(4q) budget across degrees 2..k
        shares = rng.dirichlet([1.0] * (k_deg - 1)) * 0.9
        for j in range(2, k_deg + 1):
            cap = shares[j - 2] / (4 * q * j * float(X) ** (j - 1))
            beta[j - 1] = float(rng.uniform(-cap, cap))
    return beta


def cmd_series(args):
    system = _load(args)
    budget = _budget(args)
    header = _base_header(args, "series")
    n, kn = system.n, system.k.max_degree
    if system.s <= (n + 1) * kn:
        header["warning"] = f"series needs s > (n+1)k_n = {(n + 1) * kn}"
        # still emit per-q terms: T(q) is defined regardless
        columns = ["q", "T_q"]
        rows = [
            {"q": q, "T_q": T_q(system, q, budget)}
            for q in range(1, args.Q + 1)
        ]
        return header, columns, rows
    approx = series_truncated(system, args.Q, eps=args.eps, budget=budget)
    header["partial_sum"] = approx.partial_sum
    header["tail_report"] = approx.tail_report
    header["eps"] = approx.eps
    columns = ["q", "T_q"]
    rows = [{"q": q, "T_q": t} for q, t in approx.per_q_terms]
    return header, columns, rows


def cmd_sint(args):
    system = _load(args)
    header = _base_header(args, "sint")
    columns = ["route", "value", "quad_error", "tail_bound", "param", "evaluations"]
    rows = []
    tr = singular_integral_truncated(system, args.U, tol=args.tol)
    rows.append(
        {
            "route": tr.route,
            "value": tr.value,
            "quad_error": tr.quad_error,
            "tail_bound": tr.tail_bound,
            "param": tr.param,
            "evaluations": tr.evaluations,
        }
    )
    if args.T is not None:
        mc = singular_integral_smoothed(
            system, args.T, args.mc_samples, seed=args.seed, threads=args.threads
        )
        rows.append(
            {
                "route": mc.route,
                "value": mc.value,
                "quad_error": mc.quad_error,
                "tail_bound": mc.tail_bound,
                "param": mc.param,
                "evaluations": mc.evaluations,
            }
        )
    return header, columns, rows


def build_parser() -> _Parser:
    parser = _Parser(prog="diag-arcs", description=__doc__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    def common(p, system=True):
        if system:
            p.add_argument("--system", required=True,
                           help="system JSON path or corpus:<name>")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--budget-tuples", type=int, default=None)
        p.add_argument("--budget-bytes", type=int, default=None)
        p.add_argument("--no-timing", dest="timing", action="store_false")

    p = sub.add_parser("count", help="exact N_F(X) rows")
    common(p)
    p.add_argument("--X", required=True, help="comma-separated X values")
    p.add_argument("--method", choices=["auto", "brute", "mim"], default="auto")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("predict", help="main-term prediction with certificates")
    common(p)
    p.add_argument("--X", required=True)
    p.add_argument("--Q-cut", dest="Q_cut", type=int, default=64)
    p.add_argument("--U", type=float, default=16.0)
    p.add_argument("--T", type=float, default=32.0)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--p-max", dest="p_max", type=int, default=100)
    p.add_argument("--attempts", type=int, default=200)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("compare", help="exact counts against the prediction")
    common(p)
    p.add_argument("--X", required=True)
    p.add_argument("--Q-cut", dest="Q_cut", type=int, default=64)
    p.add_argument("--U", type=float, default=16.0)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--p-max", dest="p_max", type=int, default=100)
    p.add_argument("--attempts", type=int, default=200)
    p.add_argument("--tau", default=None, help="enable the major-arc column")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("vmvt", help="Vinogradov mean values and fits")
    common(p, system=False)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--k-max", dest="k_max", type=int, required=True)
    p.add_argument("--X", required=True)
    p.add_argument("--moment-k", dest="moment_k", default=None)
    p.add_argument("--shift", type=int, default=None)
    p.set_defaults(func=cmd_vmvt)

    p = sub.add_parser("arcs", help="arc classification / disjointness")
    common(p, system=False)
    p.add_argument("--k", required=True, help="exponent tuple, e.g. 1,3,5")
    p.add_argument("--X", type=int, required=True)
    p.add_argument("--tau", required=True)
    p.add_argument("--classify", action="store_true")
    p.add_argument("--alpha", default=None)
    p.set_defaults(func=cmd_arcs)

    p = sub.add_parser("weyl", help="Weyl sums and the major-arc error sweep")
    common(p, system=False)
    p.add_argument("--error-sweep", action="store_true")
    p.add_argument("--k", type=int, default=2, help="dense degree for the sweep")
    p.add_argument("--k-tuple", dest="k_tuple", default="1",
                   help="exponent tuple for --eval mode")
    p.add_argument("--alpha", default="0")
    p.add_argument("--q-max", dest="q_max", type=int, default=100)
    p.add_argument("--X", default="100")
    p.add_argument("--samples", type=int, default=10)
    p.set_defaults(func=cmd_weyl)

    p = sub.add_parser("series", help="per-q T(q) table and partial sum")
    common(p)
    p.add_argument("--Q", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.1)
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("sint", help="singular integral, both routes")
    common(p)
    p.add_argument("--U", type=float, required=True)
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--mc-samples", dest="mc_samples", type=int, default=10**6)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_sint)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        header, columns, rows = args.func(args)
        if not args.timing:
            header.pop("wall_time", None)
        _emit(header, columns, rows, args)
        return 0
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return 2
    except (InputError, PreconditionError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except DiagArcsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
