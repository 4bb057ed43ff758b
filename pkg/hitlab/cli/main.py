from __future__ import annotations
import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional

from ..config_manager import load_config, load_experiment_config, save_config
from ..engine.clt_harness import ExperimentConfig, PRule, run_experiment
from ..engine.graph_model import GraphSample, require_connected, sample_er_graph
from ..engine.hitting import (
    hitting_matrix_solve,
    hitting_matrix_spectral,
    hitting_time_mc,
    hitting_time_solve,
    hitting_time_spectral,
    mean_hitting_aggregates,
    mean_target_hitting_mc,
    mean_target_hitting_solve,
    mean_target_hitting_spectral,
)
from ..engine.spectral import build_normalized_adjacency, eigendecompose
from ..errors import HitlabError
from ..file_loader import dumps_json, graph_paths, read_graph, write_csv, write_eigenvectors, write_graph, write_json
from ..settings import DEFAULT_MC_TRIALS, DEFAULT_P_BAR, DEFAULT_TARGET, FULL_MATRIX_MAX_N, HITTING_METHODS
from . import reports

logger = logging.getLogger(__name__)


class UsageError(Exception):
    """Bad flags or missing inputs; reported with exit status 2."""


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (0.0 <= value <= 1.0):
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {value}")
    return value


def _int_list(text: str) -> List[int]:
    return [_positive_int(part) for part in text.split(",") if part.strip()]


def _command_echo(args: argparse.Namespace) -> Dict[str, Any]:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("handler", "log_level", "save_prefs")}


def _load_graph(prefix: str) -> GraphSample:
    for path in graph_paths(prefix):
        if not os.path.exists(path):
            raise UsageError(f"input file not found: {path}")
    return read_graph(prefix)


def _require_file(path: str) -> None:
    if not os.path.exists(path):
        raise UsageError(f"input file not found: {path}")


def _emit(payload: Dict[str, Any], out: Optional[str]) -> None:
    if out:
        write_json(out, payload)
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(dumps_json(payload))


def _progress(pct: int) -> None:
    logger.info(f"Progress {pct}%")


def _default_samples_path(out: str) -> str:
    base, _ = os.path.splitext(out)
    return f"{base}_samples.csv"


def _save_preferences(args: argparse.Namespace, prefs: Dict[str, Any]) -> None:
    """Persist the log level, target and worker count of this run as defaults."""
    updated = dict(prefs, log_level=args.log_level)
    if getattr(args, "target", None) is not None:
        updated["default_target"] = args.target
    if getattr(args, "workers", None) is not None:
        updated["workers"] = args.workers
    save_config(updated)
    logger.info(f"Saved preferences {updated}")


def cmd_gen(args: argparse.Namespace) -> int:
    g = sample_er_graph(args.n, args.p, args.seed)
    csv_path, meta_path = write_graph(g, args.out)
    logger.info(f"Wrote G({g.n}, {g.p}) with {g.edge_count} edges to {csv_path}, {meta_path}")
    return 0


def cmd_spectrum(args: argparse.Namespace) -> int:
    g = _load_graph(args.input)
    require_connected(g)
    B = build_normalized_adjacency(g)
    dec = eigendecompose(B)
    payload = {"command": _command_echo(args), **reports.spectrum_report(g, B, dec, args.target)}
    _emit(payload, args.out)
    if args.eigenvectors:
        write_eigenvectors(args.eigenvectors, dec)
    return 0


def cmd_hit(args: argparse.Namespace) -> int:
    g = _load_graph(args.input)
    if args.full and g.n > FULL_MATRIX_MAX_N:
        raise UsageError(f"--full is limited to n <= {FULL_MATRIX_MAX_N}, graph has n={g.n}")
    if args.full and args.method == "mc":
        raise UsageError("--full is not available with --method mc")

    dec = None
    if args.method == "spectral":
        require_connected(g)
        dec = eigendecompose(build_normalized_adjacency(g))

    payload: Dict[str, Any] = {"command": _command_echo(args)}
    if args.source is not None:
        if args.method == "mc":
            value = hitting_time_mc(g, args.source, args.target, args.trials, args.seed)
        elif args.method == "spectral":
            value = hitting_time_spectral(dec, g, args.source, args.target)
        else:
            value = hitting_time_solve(g, args.source, args.target)
        payload.update(reports.pair_report(g, args.method, args.source, args.target, value))
    else:
        if args.method == "spectral":
            profile = mean_target_hitting_spectral(dec, g, args.target)
        elif args.method == "solve":
            profile = mean_target_hitting_solve(g, args.target)
        else:
            profile = mean_target_hitting_mc(g, args.target, args.trials, args.seed)
        payload.update(reports.hitting_report(g, profile, include_column=not args.no_column))

    if args.full:
        H = hitting_matrix_spectral(dec, g) if args.method == "spectral" else hitting_matrix_solve(g)
        H_target, H_start = mean_hitting_aggregates(g, H)
        payload["aggregates"] = reports.aggregates_report(H_target, H_start, g.n)

    _emit(payload, args.out)
    return 0


def cmd_clt(args: argparse.Namespace) -> int:
    _require_file(args.config)
    cfg = load_experiment_config(args.config)
    report = run_experiment(cfg, workers=args.workers, progress_cb=_progress)
    payload = report.to_dict()
    payload["notes"] = {"p_bar": load_config().get("p_bar", DEFAULT_P_BAR)}
    write_json(args.out, payload)
    samples_path = args.samples or _default_samples_path(args.out)
    write_csv(samples_path, report.samples_frame())
    logger.info(f"Wrote {args.out} and {samples_path}")
    return 0


def cmd_diag(args: argparse.Namespace) -> int:
    if args.input:
        g = _load_graph(args.input)
        require_connected(g)
        B = build_normalized_adjacency(g)
        dec = eigendecompose(B)
        payload = reports.diag_graph_report(g, B, dec, args.target, p_scale=args.p_scale)
        _emit({"command": _command_echo(args), **payload}, args.out)
        return 0

    if not args.n_grid:
        raise UsageError("diag needs either --in or --n-grid")
    if (args.p is None) == (args.c is None):
        raise UsageError("diag --n-grid needs exactly one of --p or --c")
    p_rule = PRule(kind="constant", p=args.p) if args.p is not None else PRule(kind="log", c=args.c)
    cfg = ExperimentConfig(
        n_grid=tuple(args.n_grid),
        p_rule=p_rule,
        replications=args.seeds,
        master_seed=args.master_seed,
        target=args.target,
        statistics=("diagnostics",),
    )
    report = run_experiment(cfg, workers=args.workers, progress_cb=_progress)
    _emit({"command": _command_echo(args), **reports.diag_series_report(report)}, args.out)
    if args.samples:
        write_csv(args.samples, report.samples_frame())
    return 0


def build_parser(prefs: Optional[Dict[str, Any]] = None) -> argparse.ArgumentParser:
    prefs = prefs or {}
    default_target = int(prefs.get("default_target", DEFAULT_TARGET))
    default_workers = prefs.get("workers")

    parser = argparse.ArgumentParser(
        prog="hitlab",
        description="Random-walk hitting times on Erdos-Renyi graphs: spectral formula, oracles and CLT experiments.",
    )
    parser.add_argument("--log-level", default=prefs.get("log_level", "WARNING"),
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--save-prefs", action="store_true",
                        help="store --log-level, --target and --workers as future defaults")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("gen", help="sample G(n, p) and write edge list + metadata")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--p", type=_probability, required=True)
    p.add_argument("--seed", type=_non_negative_int, required=True)
    p.add_argument("--out", required=True, help="output prefix (writes PREFIX.csv and PREFIX.json)")
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("spectrum", help="eigendecomposition of B and spectral statistics")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--target", type=_non_negative_int, default=default_target)
    p.add_argument("--out")
    p.add_argument("--eigenvectors", help="also dump eigenvectors as CSV (row k = v_k); large")
    p.set_defaults(handler=cmd_spectrum)

    p = sub.add_parser("hit", help="hitting times toward a target vertex")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--target", type=_non_negative_int, default=default_target)
    p.add_argument("--source", type=_non_negative_int)
    p.add_argument("--method", choices=HITTING_METHODS, default="spectral")
    p.add_argument("--trials", type=_positive_int, default=DEFAULT_MC_TRIALS)
    p.add_argument("--seed", type=_non_negative_int, default=0)
    p.add_argument("--full", action="store_true", help="full H matrix with H_j and H^i aggregates")
    p.add_argument("--no-column", action="store_true", help="omit the H_column array")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_hit)

    p = sub.add_parser("clt", help="run a replicated experiment from a config JSON")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--samples", help="samples CSV path (default: OUT_samples.csv)")
    p.add_argument("--workers", type=_positive_int, default=default_workers)
    p.set_defaults(handler=cmd_clt)

    p = sub.add_parser("diag", help="spectral gap, delocalization and negligibility diagnostics")
    p.add_argument("--in", dest="input")
    p.add_argument("--p-scale", type=_probability, help="p used for CLT scaling of a stored graph")
    p.add_argument("--n-grid", type=_int_list)
    p.add_argument("--p", type=_probability)
    p.add_argument("--c", type=float)
    p.add_argument("--seeds", type=_positive_int, default=10)
    p.add_argument("--master-seed", type=_non_negative_int, default=0)
    p.add_argument("--target", type=_non_negative_int, default=default_target)
    p.add_argument("--out")
    p.add_argument("--samples")
    p.add_argument("--workers", type=_positive_int, default=default_workers)
    p.set_defaults(handler=cmd_diag)

    return parser


def execute(argv: Optional[List[str]] = None) -> int:
    """Run one command; returns 0 on success, 1 on a domain error, 2 on a usage error."""
    prefs = load_config()
    parser = build_parser(prefs)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    logging.basicConfig(level=getattr(logging, args.log_level), stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    if args.save_prefs:
        _save_preferences(args, prefs)
    try:
        return args.handler(args)
    except UsageError as e:
        print(f"{parser.prog} {args.verb}: error: {e}", file=sys.stderr)
        return 2
    except HitlabError as e:
        logger.error(f"{args.verb} failed: {e}")
        print(f"{e.name}: {e}", file=sys.stderr)
        return 1


def run_cli() -> None:
    sys.exit(execute())
