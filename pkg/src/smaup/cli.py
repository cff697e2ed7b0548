"""Command-line surface of the toolkit.

Subcommands mirror the library modules: ``weights``, ``simulate``,
``permute-rho``, ``aggregate``, ``test``, ``scan``, ``null``, ``power``,
``size``, ``effects``, and ``export-critical-values``. All randomness flows
from one ``--seed``; when omitted, a seed is drawn from OS entropy and
echoed so the run can be reproduced. Every output artifact embeds the
toolkit version, the master seed, and a hash of the effective configuration.

Exit codes: 0 success, 2 configuration/parse failure, 3 numerical failure,
4 experiment stall.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import secrets
import sys
from pathlib import Path

from ._version import __version__
from .core import min_safe_k, scan_k, smaup_test
from .critical_values import DEFAULT_TABLE, export_critical_values_csv
from .errors import (
    DegenerateInputError,
    DegenerateSampleError,
    ExperimentStallError,
    NumericalError,
    RetryExhaustedError,
    SmaupError,
    UndefinedRatioError,
)
from .experiments import (
    EffectsConfig,
    NullDistribution,
    effects_experiment,
    generate_null,
    lattice_for_area_count,
    power_experiment,
    size_experiment,
)
from .regionalize import aggregate_mean, random_regions, regionalization_to_csv
from .sar import (
    SarSpec,
    area_variable_from_csv,
    area_variable_to_csv,
    generate_sar,
    generate_with_target_rho,
)
from .weights import (
    SpatialWeights,
    build_lattice_rook,
    from_adjacency_text,
    from_geojson,
    is_connected,
)

_NUMERICAL_ERRORS = (
    NumericalError,
    DegenerateInputError,
    DegenerateSampleError,
    UndefinedRatioError,
    RetryExhaustedError,
)


def _default_workers() -> int:
    env = os.environ.get("SMAUP_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _resolve_seed(args) -> int:
    if args.seed is None:
        seed = secrets.randbits(63)
        print(f"seed: {seed} (drawn from OS entropy; pass --seed {seed} to reproduce)",
              file=sys.stderr)
        return seed
    return args.seed


# Execution details that must not change result bytes (outputs stay identical
# across worker counts and output destinations).
_NON_CONFIG_ARGS = {"func", "out", "json", "regions_out", "workers"}


def _config_hash(args) -> str:
    payload = {k: v for k, v in sorted(vars(args).items())
               if k not in _NON_CONFIG_ARGS
               and isinstance(v, (int, float, str, bool, list, tuple, type(None)))}
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _metadata(args, seed: int | None = None) -> dict:
    meta = {"toolkit_version": __version__, "config_hash": _config_hash(args)}
    if seed is not None:
        meta["master_seed"] = seed
    return meta


def _metadata_comment(args, seed: int | None = None) -> str:
    meta = _metadata(args, seed)
    return "# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n"


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_weights(path: str) -> SpatialWeights:
    return SpatialWeights.from_json(Path(path).read_text())


def _load_values(path: str, w: SpatialWeights):
    return area_variable_from_csv(Path(path).read_text(), w)


def _float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_weights(args) -> int:
    chosen = [opt for opt in (args.lattice, args.adjacency, args.geojson) if opt]
    if len(chosen) != 1:
        raise ValueError("pass exactly one of --lattice R C, --adjacency FILE, --geojson FILE")
    standardized = not args.raw
    if args.lattice:
        rows, cols = args.lattice
        w = build_lattice_rook(rows, cols, standardized=standardized)
    elif args.adjacency:
        w = from_adjacency_text(Path(args.adjacency).read_text(), standardized=standardized)
    else:
        w = from_geojson(Path(args.geojson).read_text(), standardized=standardized)
    doc = w.to_dict()
    doc.update(_metadata(args))
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"n={w.n} edges={w.edge_count} connected={is_connected(w)} -> {args.out}")
    else:
        sys.stdout.write(text)
        print(f"n={w.n} edges={w.edge_count} connected={is_connected(w)}", file=sys.stderr)
    return 0


def _weights_from_args(args) -> SpatialWeights:
    if getattr(args, "lattice", None):
        rows, cols = args.lattice
        return build_lattice_rook(rows, cols)
    if getattr(args, "weights", None):
        return _load_weights(args.weights)
    raise ValueError("pass --weights FILE or --lattice R C")


def _cmd_simulate(args) -> int:
    seed = _resolve_seed(args)
    w = _weights_from_args(args)
    y = generate_sar(w, SarSpec(rho=args.rho, seed=seed))
    text = _metadata_comment(args, seed) + area_variable_to_csv(y)
    _write_text(args.out, text)
    return 0


def _cmd_permute_rho(args) -> int:
    seed = _resolve_seed(args)
    w = _load_weights(args.weights)
    y = _load_values(args.values, w)
    permuted = generate_with_target_rho(
        w, y, target=args.target, window=args.window,
        max_retries=args.max_retries, seed=seed,
    )
    meta = permuted.meta or {}
    text = _metadata_comment(args, seed)
    text += f"# attempts={meta.get('attempts')} rho_estimate={meta.get('rho_estimate')}\n"
    text += area_variable_to_csv(permuted)
    _write_text(args.out, text)
    return 0


def _cmd_aggregate(args) -> int:
    seed = _resolve_seed(args)
    w = _load_weights(args.weights)
    y = _load_values(args.values, w)
    regions = random_regions(w, args.k, seed=seed)
    agg = aggregate_mean(y, regions)
    if args.regions_out:
        _write_text(args.regions_out, _metadata_comment(args, seed) + regionalization_to_csv(regions))
    lines = ["region_id,mean,size"]
    lines.extend(
        f"{j},{float(agg.region_means[j])!r},{int(agg.region_sizes[j])}"
        for j in range(agg.k)
    )
    _write_text(args.out, _metadata_comment(args, seed) + "\n".join(lines) + "\n")
    return 0


def _result_table(result) -> str:
    stars = result.significance_stars()
    header = f"{'N':>6} {'k':>6} {'rho':>8} {'theta':>7} {'M':>9} " \
             f"{'M_crit(0.01)':>13} {'M_crit(0.05)':>13} {'M_crit(0.1)':>12} {'pseudo-p':>9} {'sig':>4}"
    pp = "-" if result.pseudo_p is None else f"{result.pseudo_p:.3f}"
    row = (
        f"{result.n:>6} {result.k:>6} {result.rho_used:>8.3f} {result.theta:>7.3f} "
        f"{result.m_value:>9.5f} {result.critical_values[0.01]:>13.5f} "
        f"{result.critical_values[0.05]:>13.5f} {result.critical_values[0.1]:>12.5f} "
        f"{pp:>9} {stars:>4}"
    )
    return header + "\n" + row


def _cmd_test(args) -> int:
    w = _load_weights(args.weights)
    y = _load_values(args.values, w)
    null = NullDistribution.from_json(Path(args.null).read_text()) if args.null else None
    result = smaup_test(y, w, args.k, alpha=args.alpha, null=null, rho=args.rho)
    print(_result_table(result))
    decision = result.decision[args.alpha]
    if null is not None:
        decision = result.pseudo_p_decision[args.alpha]
    verdict = "rejected" if decision else "not rejected"
    print(f"H0 (not MAUP-sensitive) {verdict} at alpha={args.alpha}")
    if args.json:
        doc = result.to_dict()
        doc.update(_metadata(args))
        Path(args.json).write_text(json.dumps(doc, indent=2) + "\n")
    return 0


def _cmd_scan(args) -> int:
    w = _load_weights(args.weights)
    y = _load_values(args.values, w)
    null = NullDistribution.from_json(Path(args.null).read_text()) if args.null else None
    k_max = args.k_max if args.k_max is not None else w.n
    k_min = args.k_min if args.k_min is not None else 1
    results = scan_k(y, w, alpha=args.alpha, k_min=k_min, k_max=k_max, null=null, rho=args.rho)
    pp_header = "pseudo-p" if null is not None else f"M_crit({args.alpha})"
    print(f"{'k':>6} {'theta':>7} {'M':>9} {pp_header:>13} {'decision':>12} {'sig':>4}")
    for res in results:
        if null is not None:
            compare = f"{res.pseudo_p:.3f}"
            rejected = res.pseudo_p_decision[args.alpha]
        else:
            compare = f"{res.critical_values[args.alpha]:.5f}"
            rejected = res.decision[args.alpha]
        decision = "reject" if rejected else "not-reject"
        print(f"{res.k:>6} {res.theta:>7.3f} {res.m_value:>9.5f} {compare:>13} "
              f"{decision:>12} {res.significance_stars():>4}")
    verdict = min_safe_k(y, w, alpha=args.alpha, k_min=k_min, k_max=k_max, null=null, rho=args.rho)
    if verdict is None:
        print(f"no safe k in [{k_min}, {k_max}] at alpha={args.alpha}")
    else:
        print(f"minimum safe k: {verdict} (alpha={args.alpha})")
    if args.json:
        doc = {
            "min_safe_k": verdict,
            "alpha": args.alpha,
            "k_range": [k_min, k_max],
            "results": [res.to_dict() for res in results],
        }
        doc.update(_metadata(args))
        Path(args.json).write_text(json.dumps(doc, indent=2) + "\n")
    return 0


def _cmd_null(args) -> int:
    seed = _resolve_seed(args)
    if args.n is not None:
        w = lattice_for_area_count(args.n)
    else:
        w = _weights_from_args(args)
    dist = generate_null(
        w, rho=args.rho, replicates=args.replicates, r=args.r,
        master_seed=seed, workers=args.workers,
    )
    doc = dist.to_dict()
    doc.update(_metadata(args, seed))
    _write_text(args.out, json.dumps(doc, indent=2) + "\n")
    return 0


def _cmd_power_or_size(args, kind: str) -> int:
    seed = _resolve_seed(args)
    runner = power_experiment if kind == "power" else size_experiment
    report = runner(
        n_values=args.n,
        rho_values=args.rhos,
        instances=args.instances,
        alpha=args.alpha,
        master_seed=seed,
        workers=args.workers,
        r=args.r,
    )
    if args.format == "csv":
        _write_text(args.out, _metadata_comment(args, seed) + report.to_csv())
    else:
        doc = report.to_dict()
        doc.update(_metadata(args, seed))
        _write_text(args.out, json.dumps(doc, indent=2) + "\n")
    return 0


def _cmd_effects(args) -> int:
    seed = _resolve_seed(args)
    k_lists: dict[int, tuple[int, ...]] = {}
    for cell in args.cell:
        head, sep, tail = cell.partition(":")
        if not sep:
            raise ValueError(f"--cell must look like N:k1,k2,... got {cell!r}")
        k_lists[int(head)] = tuple(_int_list(tail))
    config = EffectsConfig(
        k_lists=k_lists,
        rho_values=tuple(args.rhos),
        instances=args.instances,
        r=args.r,
        rho_isolation=not args.no_isolation,
        master_seed=seed,
    )
    summary = effects_experiment(config, workers=args.workers)
    if args.format == "csv":
        _write_text(args.out, _metadata_comment(args, seed) + summary.to_csv())
    else:
        doc = summary.to_dict()
        doc.update(_metadata(args, seed))
        _write_text(args.out, json.dumps(doc, indent=2) + "\n")
    return 0


def _cmd_export_critical_values(args) -> int:
    text = f"# toolkit_version={__version__} table_version={DEFAULT_TABLE.version}\n"
    _write_text(args.out, text + export_critical_values_csv())
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_seed(p):
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (default: drawn from OS entropy and echoed)")


def _add_workers(p):
    p.add_argument("--workers", type=int, default=_default_workers(),
                   help="worker processes (default: logical cores, or $SMAUP_WORKERS)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smaup",
        description="MAUP sensitivity testing and simulation toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("weights", help="build contiguity weights")
    p.add_argument("--lattice", nargs=2, type=int, metavar=("R", "C"))
    p.add_argument("--adjacency", metavar="FILE")
    p.add_argument("--geojson", metavar="FILE")
    p.add_argument("--raw", action="store_true", help="binary weights, no row standardization")
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=_cmd_weights)

    p = sub.add_parser("simulate", help="draw one SAR field")
    p.add_argument("--weights", metavar="FILE")
    p.add_argument("--lattice", nargs=2, type=int, metavar=("R", "C"))
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--out", metavar="FILE")
    _add_seed(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("permute-rho", help="rank-permute a variable toward a target rho")
    p.add_argument("--values", required=True, metavar="CSV")
    p.add_argument("--weights", required=True, metavar="JSON")
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--window", type=float, default=0.5)
    p.add_argument("--max-retries", type=int, default=100)
    p.add_argument("--out", metavar="FILE")
    _add_seed(p)
    p.set_defaults(func=_cmd_permute_rho)

    p = sub.add_parser("aggregate", help="random contiguous aggregation + region means")
    p.add_argument("--values", required=True, metavar="CSV")
    p.add_argument("--weights", required=True, metavar="JSON")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--regions-out", metavar="FILE")
    p.add_argument("--out", metavar="FILE")
    _add_seed(p)
    p.set_defaults(func=_cmd_aggregate)

    p = sub.add_parser("test", help="run the MAUP-sensitivity test")
    p.add_argument("--values", required=True, metavar="CSV")
    p.add_argument("--weights", required=True, metavar="JSON")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--null", metavar="FILE")
    p.add_argument("--rho", type=float, default=None, help="skip estimation, use this rho")
    p.add_argument("--alpha", type=float, default=0.05, choices=[0.01, 0.05, 0.1])
    p.add_argument("--json", metavar="FILE")
    p.set_defaults(func=_cmd_test)

    p = sub.add_parser("scan", help="scan aggregation levels for the minimum safe k")
    p.add_argument("--values", required=True, metavar="CSV")
    p.add_argument("--weights", required=True, metavar="JSON")
    p.add_argument("--alpha", type=float, default=0.05, choices=[0.01, 0.05, 0.1])
    p.add_argument("--k-min", type=int, default=None)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--null", metavar="FILE")
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--json", metavar="FILE")
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("null", help="simulate a null distribution for (N, rho)")
    p.add_argument("--n", type=int, default=None, help="area count (perfect square lattice)")
    p.add_argument("--lattice", nargs=2, type=int, metavar=("R", "C"))
    p.add_argument("--weights", metavar="FILE")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--replicates", type=int, required=True)
    p.add_argument("--r", type=int, default=30)
    p.add_argument("--out", metavar="FILE")
    _add_seed(p)
    _add_workers(p)
    p.set_defaults(func=_cmd_null)

    for kind in ("power", "size"):
        p = sub.add_parser(kind, help=f"estimate test {kind} on (N, rho) cells")
        p.add_argument("--n", type=_int_list, required=True, help="comma list of area counts")
        p.add_argument("--rhos", type=_float_list, default=[0.0],
                       help="comma list of rho values (use --rhos=-0.9,0 for negatives)")
        p.add_argument("--instances", type=int, required=True)
        p.add_argument("--alpha", type=float, default=0.05, choices=[0.01, 0.05, 0.1])
        p.add_argument("--r", type=int, default=30)
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--out", metavar="FILE")
        _add_seed(p)
        _add_workers(p)
        p.set_defaults(func=lambda a, kind=kind: _cmd_power_or_size(a, kind))

    p = sub.add_parser("effects", help="aggregation-effects sweep over (N, rho, k) cells")
    p.add_argument("--cell", action="append", required=True, metavar="N:k1,k2,...",
                   help="lattice size and its k list; repeatable")
    p.add_argument("--rhos", type=_float_list, default=[-0.9, 0.0, 0.9],
                   help="comma list of rho values (use --rhos=-0.9,0 for negatives)")
    p.add_argument("--instances", type=int, default=10)
    p.add_argument("--r", type=int, default=30)
    p.add_argument("--no-isolation", action="store_true",
                   help="draw independent SAR fields per rho instead of permuting a shared base")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", metavar="FILE")
    _add_seed(p)
    _add_workers(p)
    p.set_defaults(func=_cmd_effects)

    p = sub.add_parser("export-critical-values", help="dump the embedded critical-value table")
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=_cmd_export_critical_values)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ExperimentStallError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except _NUMERICAL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (SmaupError, ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
