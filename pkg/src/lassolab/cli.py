"""Command-line front end.

Every subcommand writes one report, JSON by default, to ``--out`` or stdout.
Exit codes: 0 success, 2 bad input, 3 enumeration cap refusal, 4 solver
non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__, conditions
from .conditions import ConeSpec, _jsonable
from .core import Support, as_array, standardize, support_of
from .csvio import ingest_matrix, ingest_vector
from .designs import FAMILIES, DesignSpec, generate_design
from .errors import ConvergenceError, LassoLabError, PreconditionError
from .experiment import SCHEMA_VERSION, ExperimentConfig, SparseSpec, design_summary, run_experiment
from .oracle import LambdaRule, NoiseModel, support_recovery_check, verify_bounds
from .solver import SolverOptions, solve_bplp, solve_lasso

CHECKS = (
    "mip",
    "rip",
    "nullspace",
    "compatibility",
    "restricted",
    "adaptive",
    "strong",
    "weak_ir",
    "uniform_ir",
    "implications",
)
DEFAULT_CHECKS = "compatibility,restricted,strong,adaptive,uniform_ir,nullspace"


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0, help="seed for random designs and noise")
    p.add_argument("--out", type=Path, help="output file (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def _design_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("design")
    g.add_argument("--design", type=Path, help="design matrix CSV (rows are observations)")
    g.add_argument("--family", choices=FAMILIES, help="generate the design from a family instead")
    g.add_argument("--n", type=int, help="rows for random families")
    g.add_argument("--p", type=int, default=5, help="number of variables")
    g.add_argument("--rho", type=float, default=0.0, help="family correlation parameter")
    g.add_argument("--standardize", action="store_true", help="center columns and scale to unit mean square")


def _beta_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("true coefficients")
    g.add_argument("--beta0", type=Path, help="beta0 CSV (one row or one column)")
    g.add_argument("--s", type=int, help="sparsity: beta0 is supported on variables 1..s")
    g.add_argument("--magnitude", type=float, default=1.0, help="common magnitude of the nonzero entries")
    g.add_argument("--signs", type=_int_list, help="signs of the nonzero entries, e.g. 1,-1,1")


def _noise_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("noise and tuning")
    g.add_argument("--sigma", type=float, default=1.0, help="noise level; 0 gives the noiseless problem")
    g.add_argument("--c", type=float, default=2.0, help="overrule multiplier of the lambda rule")
    g.add_argument("--tau", type=float, default=3.0, help="tail exponent of the lambda rule")
    g.add_argument("--lambda", dest="lam", type=float, help="fixed lambda (required when sigma is 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lassolab", description="Lasso conditions and oracle-bound laboratory.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-design", help="generate a design matrix")
    _common(p)
    _design_args(p)

    p = sub.add_parser("check-conditions", help="compute design-condition constants")
    _common(p)
    _design_args(p)
    p.add_argument("--checks", default=DEFAULT_CHECKS, help=f"comma list from: {', '.join(CHECKS)}")
    p.add_argument("--support", type=_int_list, help="1-based support S (default: first s variables)")
    p.add_argument("--s", type=int, default=None, help="support size when --support is not given")
    p.add_argument("--L", type=float, default=3.0, help="cone opening")
    p.add_argument("--tau-signs", type=_float_list, help="sign vector on S for the weak irrepresentable check")
    p.add_argument("--all-subsets", action="store_true", help="minimize the eigenvalue constants over every |S| = s")
    p.add_argument("--subset-cap", type=int, default=conditions.DEFAULT_SUBSET_CAP)

    p = sub.add_parser("solve", help="solve a Lasso or basis pursuit problem")
    _common(p)
    _design_args(p)
    _beta_args(p)
    _noise_args(p)
    p.add_argument("--response", type=Path, help="response CSV; otherwise Y = X beta0 + noise")
    p.add_argument("--bplp", action="store_true", help="minimum l1-norm interpolation instead of the Lasso")
    p.add_argument("--max-iters", type=int, default=SolverOptions.max_iters)
    p.add_argument("--tol", type=float, default=SolverOptions.tol)

    p = sub.add_parser("verify-bounds", help="check the oracle bounds on one noise draw")
    _common(p)
    _design_args(p)
    _beta_args(p)
    _noise_args(p)

    p = sub.add_parser("simulate", help="Monte Carlo check of the oracle bounds")
    _common(p)
    _design_args(p)
    _beta_args(p)
    _noise_args(p)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--sweep", choices=("lambda", "rho"), help="repeat the simulation over a grid of lambda or rho")
    p.add_argument("--values", type=_float_list, help="grid values for --sweep")

    p = sub.add_parser("recovery-check", help="support recovery along a lambda grid (noiseless)")
    _common(p)
    _design_args(p)
    _beta_args(p)
    p.add_argument("--lambdas", type=_float_list, help="lambda grid (default: 10 values below lambda_max)")
    return parser


def _design(args):
    if (args.design is None) == (args.family is None):
        raise PreconditionError("give exactly one of --design and --family")
    if args.design is not None:
        X = ingest_matrix(args.design)
        spec = None
    else:
        spec = DesignSpec(args.family, p=args.p, n=args.n, rho=args.rho, seed=args.seed)
        X = generate_design(spec)
    A = standardize(X) if args.standardize else as_array(X)
    return A, spec


def _beta0(args, p):
    if args.beta0 is not None:
        b = ingest_vector(args.beta0)
        if b.size != p:
            raise PreconditionError(f"beta0 has length {b.size}, design has p={p}")
        return b, tuple(float(v) for v in b)
    if args.s is None:
        raise PreconditionError("give --beta0 or --s")
    spec = SparseSpec(args.s, args.magnitude, None if args.signs is None else tuple(args.signs))
    return spec.vector(p), spec


def _beta_config(bspec):
    return asdict(bspec) if isinstance(bspec, SparseSpec) else list(bspec)


def _support(args, p):
    if args.support:
        if any(i < 1 or i > p for i in args.support):
            raise PreconditionError(f"support indices must lie in 1..{p}")
        return Support.of([i - 1 for i in args.support], p)
    if args.s is None:
        raise PreconditionError("give --support or --s")
    return Support.first(args.s, p)


def _report(command, config, A=None, conditions_=(), bounds=(), aggregates=None, results=None):
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "design_summary": None if A is None else design_summary(A),
        "condition_reports": list(conditions_),
        "bound_reports": list(bounds),
        "aggregates": aggregates or {},
        "results": results or {},
    }


def _design_config(args, spec):
    return {
        "design": str(args.design) if args.design is not None else None,
        "family": None if spec is None else spec.to_dict(),
        "standardize": args.standardize,
        "seed": args.seed,
    }


def cmd_gen_design(args):
    A, spec = _design(args)
    rows = [[f"x{j + 1}" for j in range(A.shape[1])], *A.tolist()]
    report = _report("gen-design", _design_config(args, spec), A, results={"matrix": A.tolist()})
    return report, rows


def cmd_check_conditions(args):
    A, spec = _design(args)
    p = A.shape[1]
    S = _support(args, p)
    wanted = [c.strip() for c in args.checks.split(",") if c.strip()]
    unknown = sorted(set(wanted) - set(CHECKS))
    if unknown:
        raise PreconditionError(f"unknown checks: {', '.join(unknown)}")
    cone = ConeSpec(S, args.L)
    G = np.asarray(A.T @ A / A.shape[0])
    out = []
    for name in wanted:
        if name == "mip":
            out.append(conditions.mutual_incoherence(A, S.s))
        elif name == "rip":
            out.append(conditions.rip_constant(A, S.s, args.subset_cap))
        elif name == "nullspace":
            out.append(conditions.restricted_nullspace_holds(A, cone))
        elif name == "compatibility":
            out.append(conditions.compatibility_constant(A, cone))
        elif name in ("restricted", "adaptive", "strong"):
            if args.all_subsets:
                fn = {
                    "restricted": conditions.restricted_eigenvalue,
                    "adaptive": conditions.adaptive_restricted_eigenvalue,
                    "strong": conditions.strong_restricted_eigenvalue,
                }[name]
                out.append(fn(A, S.s, args.L, args.subset_cap))
            else:
                fn = {
                    "restricted": conditions.restricted_eigenvalue_at,
                    "adaptive": conditions.adaptive_restricted_eigenvalue_at,
                    "strong": conditions.strong_restricted_eigenvalue_at,
                }[name]
                out.append(fn(A, cone))
        elif name == "weak_ir":
            tau = np.ones(S.s) if args.tau_signs is None else np.asarray(args.tau_signs)
            out.append(conditions.weak_irrepresentable(G, S, tau))
        elif name == "uniform_ir":
            out.append(conditions.uniform_irrepresentable(G, S))
        elif name == "implications":
            out.extend(conditions.implication_checks(A, S.s, args.L, S=S, subset_cap=args.subset_cap))
    config = dict(_design_config(args, spec), support=S.one_based(), L=args.L, checks=wanted)
    reports = [r.to_dict() for r in out]
    rows = [["name", "value", "satisfied"]] + [[r["name"], r["value"], r["satisfied"]] for r in reports]
    return _report("check-conditions", config, A, conditions_=reports), rows


def cmd_solve(args):
    A, spec = _design(args)
    n, p = A.shape
    config = _design_config(args, spec)
    if args.response is not None:
        Y = ingest_vector(args.response)
        config["response"] = str(args.response)
    else:
        beta0, bspec = _beta0(args, p)
        Y = A @ beta0 + NoiseModel(args.sigma, args.seed).draw(n)
        config.update(beta0=_beta_config(bspec), sigma=args.sigma)
    opts = SolverOptions(max_iters=args.max_iters, tol=args.tol)
    if args.bplp:
        beta = solve_bplp(A, Y, opts)
        results = {"method": "bplp", "beta": beta.tolist(), "l1_norm": float(np.abs(beta).sum())}
    else:
        if args.lam is None:
            if args.sigma <= 0:
                raise PreconditionError("--lambda is required for a noiseless solve")
            lam = LambdaRule(args.c, args.tau).lam(args.sigma, n, p)
        else:
            lam = args.lam
        sol = solve_lasso(A, Y, lam, opts)
        if not sol.converged:
            raise ConvergenceError(f"coordinate descent stopped after {sol.iterations} sweeps without converging")
        beta = sol.beta
        results = {
            "method": "lasso",
            "lambda": lam,
            "beta": beta.tolist(),
            "objective": sol.objective,
            "kkt_residual": sol.kkt_residual,
            "iterations": sol.iterations,
            "support": support_of(beta).one_based(),
        }
    rows = [["beta"]] + [[v] for v in beta.tolist()]
    return _report("solve", config, A, results=results), rows


def _bound_rows(bounds, extra=()):
    head = [*extra, "bound_name", "theoretical", "empirical", "holds", "on_good_event", "lambda_used"]
    return [head] + [[b.get(k) for k in head] for b in bounds]


def cmd_verify_bounds(args):
    A, spec = _design(args)
    beta0, bspec = _beta0(args, A.shape[1])
    rule = LambdaRule(args.c, args.tau)
    v = verify_bounds(A, beta0, NoiseModel(args.sigma, args.seed), rule, lam=args.lam)
    d = v.to_dict()
    bounds = d.pop("bounds")
    config = dict(_design_config(args, spec), sigma=args.sigma, c=args.c, tau=args.tau, **{"lambda": args.lam})
    config["beta0"] = _beta_config(bspec)
    report = _report("verify-bounds", config, A, bounds=bounds, aggregates=d, results={"beta_hat": v.beta_hat.tolist()})
    return report, _bound_rows(bounds)


def _simulate_once(args, A, spec, lam):
    _, bspec = _beta0(args, A.shape[1])
    cfg = ExperimentConfig(
        design=spec,
        beta0=bspec,
        noise=NoiseModel(args.sigma, args.seed),
        rule=LambdaRule(args.c, args.tau),
        reps=args.reps,
        lam=lam,
    )
    report = run_experiment(cfg, X=A)
    report["config"]["design_file"] = None if args.design is None else str(args.design)
    report["config"]["standardize"] = args.standardize
    return report


def cmd_simulate(args):
    if args.sweep is None:
        A, spec = _design(args)
        report = _simulate_once(args, A, spec, args.lam)
        return report, _bound_rows(report["bound_reports"], extra=("replication",))
    if not args.values:
        raise PreconditionError("--sweep needs --values")
    if args.sweep == "rho" and args.family is None:
        raise PreconditionError("a rho sweep needs --family")
    if args.sweep == "lambda":
        A, spec = _design(args)
    points = []
    for v in args.values:
        if args.sweep == "rho":
            A, spec = _design(argparse.Namespace(**{**vars(args), "rho": v}))
        points.append((v, _simulate_once(args, A, spec, v if args.sweep == "lambda" else args.lam)))
    first = points[0][1]
    bounds, conds, series = [], [], []
    for v, rep in points:
        bounds.extend(dict(b, sweep_value=v) for b in rep["bound_reports"])
        conds.extend(dict(c, meta=dict(c["meta"], sweep_value=v)) for c in rep["condition_reports"])
        series.append({"value": v, "design_summary": rep["design_summary"], "aggregates": rep["aggregates"]})
    config = dict(first["config"], sweep=args.sweep, values=list(args.values))
    aggregates = {"sweep": args.sweep, "values": list(args.values), "by_value": [s["aggregates"] for s in series]}
    report = {
        **first,
        "config": config,
        "condition_reports": conds,
        "bound_reports": bounds,
        "aggregates": aggregates,
        "results": {"sweep": series},
    }
    return report, _bound_rows(bounds, extra=("sweep_value", "replication"))


def cmd_recovery_check(args):
    A, spec = _design(args)
    n, p = A.shape
    beta0, bspec = _beta0(args, p)
    S = support_of(beta0, 0.0)
    lams = args.lambdas
    if not lams:
        lam_max = float(np.max(np.abs(2 * A.T @ (A @ beta0) / n)))
        lams = (lam_max * np.geomspace(1e-3, 0.5, 10)).tolist()
    G = A.T @ A / n
    ir = conditions.uniform_irrepresentable(G, S)
    series = []
    for lam in lams:
        rec = support_recovery_check(A, beta0, lam)
        d = rec.to_dict()
        d["lambda"] = lam
        d["selected"] = support_of(rec.beta).one_based()
        series.append(d)
    config = dict(_design_config(args, spec), lambdas=lams)
    config["beta0"] = _beta_config(bspec)
    aggregates = {
        "theta": ir.value,
        "all_subset_of_S": all(d["subset_of_S"] for d in series),
        "any_false_positive": any(not d["subset_of_S"] for d in series),
    }
    head = ["lambda", "subset_of_S", "sign_recovered", "linf_bound", "linf_ok", "weak_ir_at_kkt"]
    rows = [head] + [[d[k] for k in head] for d in series]
    return _report("recovery-check", config, A, [ir.to_dict()], aggregates=aggregates, results={"series": series}), rows


COMMANDS = {
    "gen-design": cmd_gen_design,
    "check-conditions": cmd_check_conditions,
    "solve": cmd_solve,
    "verify-bounds": cmd_verify_bounds,
    "simulate": cmd_simulate,
    "recovery-check": cmd_recovery_check,
}


def render(report, rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_jsonable(report), sort_keys=True, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in _jsonable(row)])
    return buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, rows = COMMANDS[args.command](args)
        text = render(report, rows, args.format)
    except LassoLabError as exc:
        print(f"lassolab: error: {exc}", file=sys.stderr)
        return exc.exit_code
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
