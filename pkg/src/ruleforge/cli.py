"""``ruleforge`` command line.

Subcommands::

    ruleforge mirco        --data FILE --label COL [options]
    ruleforge rcboost      --data FILE --label COL [options]
    ruleforge export-rules --model FILE [--out FILE]
    ruleforge oracle {lp,cover,tree} ...

Exit codes: 0 success, 1 usage or data error, 2 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .cover import CoverProblem, exact_cover, greedy_cover
from .dataset import DataError, load_csv
from .experiment import ExperimentConfig, InvariantError, fit_final_model, run_experiment
from .lp import LPError, solve_covering_lp
from .oracles import check_lp_certificate, enumerate_small_trees
from .rules import export_rules, load_pool, pool_to_dict

log = logging.getLogger("ruleforge")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("grid must not be empty")
    return vals


def _default_seed() -> int:
    raw = os.environ.get("RULEFORGE_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"RULEFORGE_SEED must be an integer, got {raw!r}") from None


def _add_experiment_args(p: argparse.ArgumentParser, rmp: bool) -> None:
    p.add_argument("--data", required=True, help="CSV file with a header row")
    p.add_argument("--label", required=True, help="label column name or index")
    p.add_argument("--outer", type=int, default=10, help="outer CV folds (default 10)")
    p.add_argument("--inner", type=int, default=4, help="inner CV folds for tuning (default 4)")
    p.add_argument("--seed", type=int, default=None, help="base seed (default $RULEFORGE_SEED or 0)")
    p.add_argument("--criterion", choices=["gini", "entropy"], default="gini")
    p.add_argument("--depth-grid", type=_int_list, default=[5, 10, 20])
    p.add_argument("--trees-grid", type=_int_list, default=[10, 50, 100])
    if rmp:
        p.add_argument("--rmp-grid", type=_int_list, default=[5, 10, 50, 100, 200])
    p.add_argument("--workers", type=int, default=None, help="parallel outer folds (default: CPU count)")
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--save-model", help="also fit on all data and save the rule pool as JSON")
    p.add_argument("--trace", action="store_true", help="include per-iteration traces")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ruleforge", description="Rule covering for tree ensembles")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    _add_experiment_args(sub.add_parser("mirco", help="DT / RF / MIRCO nested cross-validation"), rmp=False)
    _add_experiment_args(sub.add_parser("rcboost", help="RF / iniDT / RCBoost nested cross-validation"), rmp=True)

    ex = sub.add_parser("export-rules", help="write a saved rule pool as text")
    ex.add_argument("--model", required=True)
    ex.add_argument("--out")
    ex.add_argument("--names", action="store_true", help="use feature names instead of x<j>")

    orc = sub.add_parser("oracle", help="brute-force verifiers")
    osub = orc.add_subparsers(dest="oracle", required=True, parser_class=_Parser)
    o_lp = osub.add_parser("lp", help="solve a covering LP and print its optimality certificate")
    o_lp.add_argument("--instance", required=True, help='JSON {"m", "costs", "covered"[, "primal", "duals"]}')
    o_cov = osub.add_parser("cover", help="greedy vs exhaustive set cover")
    o_cov.add_argument("--instance", required=True)
    o_tree = osub.add_parser("tree", help="best accuracy of any depth<=2 tree")
    o_tree.add_argument("--data", required=True)
    o_tree.add_argument("--label", required=True)
    o_tree.add_argument("--depth", type=int, default=2)
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=False, allow_nan=True) + "\n"


def cmd_experiment(args) -> int:
    from .experiment import default_workers

    seed = args.seed if args.seed is not None else _default_seed()
    data = load_csv(args.data, args.label)
    if args.outer < 2 or args.inner < 0 or args.inner == 1:
        raise UsageError("--outer must be >= 2 and --inner 0 (no tuning) or >= 2")
    grids = {"max_depth": args.depth_grid, "n_trees": args.trees_grid}
    grids["max_rmp_calls"] = getattr(args, "rmp_grid", None) or [100]
    cfg = ExperimentConfig(
        command=args.command,
        outer=args.outer,
        inner=args.inner,
        seed=seed,
        criterion=args.criterion,
        grids=grids,
        trace=args.trace,
        workers=args.workers if args.workers is not None else default_workers(),
    )
    report = run_experiment(data, cfg, name=Path(args.data).stem)
    if args.save_model:
        pool, params = fit_final_model(data, cfg)
        model = {"schema": 1, "kind": "model", "algorithm": args.command, "params": params, "pool": pool_to_dict(pool)}
        Path(args.save_model).write_text(_dump(model), encoding="utf-8")
        report["model"] = {"path": args.save_model, "params": params, "n_rules": len(pool)}
    _emit(_dump(report), args.out)
    return 0


def cmd_export_rules(args) -> int:
    pool = load_pool(args.model)
    names = list(pool.feature_names) if args.names and pool.feature_names else None
    _emit(export_rules(pool, names), args.out)
    return 0


def _read_instance(path):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read instance {path}: {exc}") from exc
    return data, CoverProblem(int(data["m"]), data["costs"], data["covered"])


def cmd_oracle(args) -> int:
    if args.oracle == "lp":
        data, problem = _read_instance(args.instance)
        if "primal" in data and "duals" in data:
            z, lam, objective = data["primal"], data["duals"], None
        else:
            sol = solve_covering_lp(problem)
            z, lam, objective = sol.primal.tolist(), sol.duals.tolist(), sol.objective
        cert = check_lp_certificate(problem.m, problem.costs, problem.covered, z, lam)
        out = {"objective": objective, "primal": z, "duals": lam, "certificate": cert.as_dict(), "passes": cert.passes()}
    elif args.oracle == "cover":
        _, problem = _read_instance(args.instance)
        g = greedy_cover(problem)
        e = exact_cover(problem)
        out = {
            "greedy": {"selected": list(g.selected), "cost": g.total_cost},
            "exact": {"selected": list(e.selected), "cost": e.total_cost},
        }
    else:
        data = load_csv(args.data, args.label)
        out = {"max_depth": args.depth, "best_accuracy": enumerate_small_trees(data.features, data.labels, args.depth)}
    sys.stdout.write(_dump(out))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command in ("mirco", "rcboost"):
            return cmd_experiment(args)
        if args.command == "export-rules":
            return cmd_export_rules(args)
        return cmd_oracle(args)
    except (InvariantError, LPError) as exc:
        print(f"ruleforge: invariant violation: {exc}", file=sys.stderr)
        return 2
    except (UsageError, DataError, ValueError, KeyError, OSError) as exc:
        print(f"ruleforge: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
