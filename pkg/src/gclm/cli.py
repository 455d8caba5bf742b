"""Command-line interface: ``gclm <subcommand> ...``.

Exit status is 0 on success, 2 for invalid input and 3 for numerical failure.
"""
import argparse
import logging
import math
import sys
from pathlib import Path

from . import io
from .baselines import cov_threshold_path, direct_lasso_path
from .errors import DimensionMismatch, NumericalError, ValidationError
from .graph import MixedGraph, compatibility_graph, marginalize, permute_model, project_graph
from .lyapunov import as_square, as_symmetric, solve_lyapunov
from .optimizer import PRESETS, default_lambdas, fit_path, mle_refit, preset, prox_grad_fit
from .simeval.metrics import evaluate_path
from .simeval.simulate import GenConfig, marginal_scenario, standardize
from .simeval.stability import stability_select
from .simeval.study import default_jobs

log = logging.getLogger("gclm")


def _kappa(text):
    value = float(text)
    if value < 0 or math.isnan(value):
        raise argparse.ArgumentTypeError("kappa must be non-negative")
    return value


def _keep_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected a comma-separated list of 1-based vertices") from None


def _add_target(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", type=Path, help="N x p data CSV (standardized before use)")
    src.add_argument("--cov", type=Path, help="p x p covariance or correlation CSV (used as is)")


def _add_fit_options(p):
    p.add_argument("--preset", choices=sorted(PRESETS), help="named method settings")
    p.add_argument("--loss", choices=["mloglik", "frob"], help="loss function (default mloglik)")
    p.add_argument("--kappa", type=_kappa, help="penalty on ||C - I||^2 (default inf: C fixed to I)")
    p.add_argument("--tol", type=float, help="stop when the objective decreases by less (default 1e-4)")
    p.add_argument("--tol-mode", choices=["absolute", "relative"], help="how --tol is compared")
    p.add_argument("--max-iter", type=int, help="iteration cap per fit (default 100)")
    p.add_argument("--alpha", type=float, help="line-search shrink factor (default 0.5)")


def _add_output(p, default):
    p.add_argument("-o", "--output", default=default, help=f"output file, '-' for stdout (default {default})")


def _add_jobs(p):
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default $GCLM_JOBS or 1)")


def _config(args, **extra):
    overrides = {}
    for flag, field in (("loss", "loss"), ("kappa", "kappa"), ("tol", "eps"), ("tol_mode", "tol_mode"),
                        ("max_iter", "max_iter"), ("alpha", "alpha")):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[field] = value
    overrides.update(extra)
    return preset(args.preset or "mloglik-inf", **overrides)


def _target(args):
    if args.data is not None:
        return standardize(io.read_matrix(args.data))
    return as_symmetric(io.read_matrix(args.cov), str(args.cov))


def _lambdas(args):
    if args.n_lambda < 1 or args.lambda_max <= 0 or not 0 < args.lambda_min_ratio <= 1:
        raise ValidationError("need --n-lambda >= 1, --lambda-max > 0 and 0 < --lambda-min-ratio <= 1")
    return default_lambdas(args.lambda_max, args.n_lambda, args.lambda_min_ratio)


def _add_grid(p, lambda_max=6.0):
    p.add_argument("--lambda-max", type=float, default=lambda_max)
    p.add_argument("--n-lambda", type=int, default=100)
    p.add_argument("--lambda-min-ratio", type=float, default=1e-4)


def cmd_solve(args):
    B = as_square(io.read_matrix(args.B), str(args.B))
    C = as_symmetric(io.read_matrix(args.C), str(args.C))
    if B.shape != C.shape:
        raise DimensionMismatch(f"{args.B} is {B.shape} but {args.C} is {C.shape}")
    io.write_matrix(args.output, solve_lyapunov(B, C))


def _relabel(G, perm):
    pos = {v: k for k, v in enumerate(perm)}
    return MixedGraph(
        G.p,
        frozenset((pos[i], pos[j]) for i, j in G.directed),
        frozenset((pos[i], pos[j]) for i, j in G.bidirected),
    )


def cmd_project(args):
    if args.graph is None and (args.B is None or args.C is None):
        raise ValidationError("project needs --graph or both --B and --C")
    B = C = None
    if args.B is not None:
        B = as_square(io.read_matrix(args.B), str(args.B))
        C = as_symmetric(io.read_matrix(args.C), str(args.C))
        if B.shape != C.shape:
            raise DimensionMismatch(f"{args.B} is {B.shape} but {args.C} is {C.shape}")
        G = compatibility_graph(B, C)
    else:
        G = io.read_graph(args.graph)
    if args.keep_list:
        order = [v - 1 for v in args.keep_list]
        if any(not 0 <= v < G.p for v in order):
            raise ValidationError(f"--keep-list vertices must lie in 1..{G.p}")
        keep = len(order)
    else:
        keep = args.keep
        order = list(range(keep)) if keep else None
        if keep is None:
            raise ValidationError("project needs --keep or --keep-list")
    if B is not None:
        B, C, perm = permute_model(B, C, order)
    else:
        perm = order + [v for v in range(G.p) if v not in set(order)]
        if sorted(perm) != list(range(G.p)):
            raise ValidationError("--keep-list must contain distinct vertices")
    G = _relabel(G, perm)
    io.write_graph(args.output, project_graph(G, keep))
    if B is not None:
        _, Ct, _ = marginalize(B, C, keep)
        io.write_matrix(args.ctilde, Ct)


def cmd_fit(args):
    target = _target(args)
    fit = prox_grad_fit(target, _config(args, lam=args.lam))
    io.write_json(args.output, io.fit_record(fit))


def _path_doc(method, p, params, supports, fits=None):
    return {"method": method, "p": p, "lambdas": params, "records": io.path_records(params, supports, fits)}


def cmd_path(args):
    target = _target(args)
    config = _config(args)
    path = fit_path(target, _lambdas(args), config)
    io.write_json(args.output, _path_doc(args.preset or "mloglik", target.shape[0], path.lambdas, path.supports, path.fits))


def cmd_lasso_path(args):
    target = _target(args)
    lambdas = None
    if args.lambda_max is not None:
        lambdas = _lambdas(args)
    path = direct_lasso_path(
        target, lambdas, penalize_diagonal=args.penalize_diagonal, n_lambda=args.n_lambda, min_ratio=args.lambda_min_ratio
    )
    io.write_json(args.output, _path_doc("lasso", target.shape[0], path.params, path.supports, path.fits))


def cmd_covthr(args):
    target = _target(args)
    path = cov_threshold_path(target)
    io.write_json(args.output, _path_doc("covthr", target.shape[0], path.params, path.supports))


def cmd_simulate(args):
    config = GenConfig.from_density(args.p, args.k, seed=args.seed, n_samples=args.n)
    keep = args.p if args.keep is None else args.keep
    data, truth, model = marginal_scenario(config, keep=keep)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_matrix(out / "B.csv", model.B)
    io.write_matrix(out / "C.csv", model.C)
    io.write_matrix(out / "data.csv", data)
    io.write_graph(out / "graph.json", model.graph)
    io.write_graph(out / "truth.json", project_graph(model.graph, keep))


def cmd_evaluate(args):
    p, supports = io.read_path_supports(args.path)
    truth = io.read_graph(args.truth)
    if truth.p != p:
        raise DimensionMismatch(f"{args.path} has p={p} but {args.truth} has p={truth.p}")
    io.write_json(args.output, evaluate_path(supports, truth).to_dict())


def cmd_stabsel(args):
    data = io.read_matrix(args.data)
    result = stability_select(
        data,
        n_splits=args.splits,
        retain=args.retain,
        config=_config(args),
        lambdas=_lambdas(args),
        seed=args.seed,
        fit_on=args.fit_on,
        jobs=args.jobs,
    )
    doc = {
        "n_splits": result.n_splits,
        "n_ok": result.n_ok,
        "failed": [{"split": k, "error": msg} for k, msg in result.failed],
        "frequencies": result.frequencies,
        "graph": io.graph_to_dict(result.graph),
    }
    io.write_json(args.output, doc)


def cmd_mle(args):
    target = _target(args)
    G = io.read_graph(args.support)
    if G.p != target.shape[0]:
        raise DimensionMismatch(f"{args.support} has p={G.p} but the data have p={target.shape[0]}")
    fit = mle_refit(target, G.drift_support(), _config(args))
    io.write_json(args.output, io.fit_record(fit))


def build_parser():
    parser = argparse.ArgumentParser(prog="gclm", description="Graphical continuous Lyapunov models.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="equilibrium covariance from B and C")
    p.add_argument("--B", type=Path, required=True)
    p.add_argument("--C", type=Path, required=True)
    _add_output(p, "Sigma.csv")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("project", help="graph projection onto kept vertices")
    p.add_argument("--graph", type=Path, help="mixed graph JSON")
    p.add_argument("--B", type=Path)
    p.add_argument("--C", type=Path)
    keep = p.add_mutually_exclusive_group()
    keep.add_argument("--keep", type=int, help="keep the first KEEP vertices")
    keep.add_argument("--keep-list", type=_keep_list, help="comma-separated vertices to keep, in order")
    _add_output(p, "projected.json")
    p.add_argument("--ctilde", default="Ctilde.csv", help="marginal noise matrix output (with --B/--C)")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("fit", help="single penalized fit")
    _add_target(p)
    _add_fit_options(p)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    _add_output(p, "-")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("path", help="regularization path")
    _add_target(p)
    _add_fit_options(p)
    _add_grid(p)
    _add_output(p, "-")
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("lasso-path", help="direct lasso baseline path")
    _add_target(p)
    p.add_argument("--penalize-diagonal", action="store_true")
    p.add_argument("--lambda-max", type=float, default=None, help="default: smallest value giving a diagonal B")
    p.add_argument("--n-lambda", type=int, default=100)
    p.add_argument("--lambda-min-ratio", type=float, default=1e-4)
    _add_output(p, "-")
    p.set_defaults(func=cmd_lasso_path)

    p = sub.add_parser("covthr", help="covariance thresholding path")
    _add_target(p)
    _add_output(p, "-")
    p.set_defaults(func=cmd_covthr)

    p = sub.add_parser("simulate", help="random model and equilibrium sample")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--k", type=float, required=True, help="expected parents per node (d = k / p)")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--keep", type=int, help="observe only the first KEEP coordinates")
    p.add_argument("--out-dir", default=".")
    _add_jobs(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="score a path against a true graph")
    p.add_argument("--path", type=Path, required=True)
    p.add_argument("--truth", type=Path, required=True)
    _add_output(p, "-")
    _add_jobs(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stabsel", help="stability selection over random half-splits")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--splits", type=int, default=200)
    p.add_argument("--retain", type=float, default=0.85)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fit-on", choices=["train", "test"], default="train")
    _add_fit_options(p)
    _add_grid(p)
    _add_jobs(p)
    _add_output(p, "-")
    p.set_defaults(func=cmd_stabsel)

    p = sub.add_parser("mle", help="unpenalized refit on a fixed support")
    _add_target(p)
    p.add_argument("--support", type=Path, required=True, help="graph JSON whose directed edges give the support")
    _add_fit_options(p)
    _add_output(p, "-")
    p.set_defaults(func=cmd_mle)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    if getattr(args, "jobs", None) is None and hasattr(args, "jobs"):
        args.jobs = default_jobs()
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"gclm {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"gclm {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
