"""Command-line surface: synth, preprocess, ccm, granger, evaluate, plot.

Every command with a --seed flag is end-to-end deterministic: identical
invocations produce byte-identical result files. The wall-clock duration is
recorded only in the sidecar manifest (<out>.manifest.json); result files
embed the deterministic manifest fields and are reproducible byte for byte.

Validation failures print one machine-parseable JSON line to stderr and
exit with status 2.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .ccm import CcmConfig, ccm_pairwise, default_lib_sizes
from .dataset import MultivariateDataset, load_csv, write_csv
from .embedding import EmbeddingConfig, embed, select_embedding
from .granger import granger_pairwise
from .preprocess import deseasonalize, exp_smooth, standardize, stationarity_report
from .report import (build_manifest, ccm_graph_to_json, evaluate_detections,
                     granger_graph_to_json, render_convergence_svg)
from .synthgen import SynthConfig, generate, ground_truth

logger = logging.getLogger(__name__)


class CliError(Exception):
    """User-facing validation failure (exit status 2)."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _finish(manifest: dict, outputs: list[Path], started: float,
            sidecar: Path) -> None:
    sidecar_payload = dict(manifest)
    sidecar_payload["outputs"] = [str(p) for p in outputs]
    sidecar_payload["duration_seconds"] = time.perf_counter() - started
    _write_json(sidecar, sidecar_payload)


def _parse_lib_sizes(text: str | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    try:
        sizes = tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise CliError("bad-lib-sizes",
                       f"--lib-sizes must be comma-separated integers, got {text!r}")
    return sizes


# --- synth ------------------------------------------------------------------

def cmd_synth(args) -> int:
    started = time.perf_counter()
    if args.noise_sd < 0:
        raise CliError("bad-noise-sd", f"--noise-sd must be >= 0, got {args.noise_sd}")
    try:
        config = SynthConfig(
            n_observations=args.n,
            noise_sd=args.noise_sd,
            burn_in=args.burn_in,
            rng_seed=args.seed,
            contemporaneous=args.contemporaneous,
        )
    except ValueError as exc:
        raise CliError("bad-config", str(exc))

    out = Path(args.out)
    truth_path = Path(args.truth) if args.truth else out.with_suffix(".truth.json")
    manifest = build_manifest(
        "synth",
        {"n": args.n, "noise_sd": args.noise_sd, "burn_in": args.burn_in,
         "contemporaneous": args.contemporaneous, "out": str(out),
         "truth": str(truth_path)},
        args.seed, {}, __version__,
    )

    dataset = generate(config)
    write_csv(dataset, out)
    truth_doc = ground_truth().to_json_dict()
    truth_doc["manifest"] = manifest
    _write_json(truth_path, truth_doc)
    _finish(manifest, [out, truth_path], started, out.with_suffix(out.suffix + ".manifest.json"))
    return 0


# --- preprocess ---------------------------------------------------------------

def cmd_preprocess(args) -> int:
    started = time.perf_counter()
    if args.smooth is not None and not 0.0 < args.smooth <= 1.0:
        raise CliError("bad-alpha", f"--smooth must lie in (0, 1], got {args.smooth}")
    if args.deseasonalize is not None and args.deseasonalize < 1:
        raise CliError("bad-period",
                       f"--deseasonalize must be >= 1, got {args.deseasonalize}")
    dataset = load_csv(args.infile, args.time_column)
    out = Path(args.out)
    report_path = (Path(args.report) if args.report
                   else out.with_suffix(".stationarity.json"))

    manifest = build_manifest(
        "preprocess",
        {"in": str(args.infile), "time_column": args.time_column,
         "deseasonalize": args.deseasonalize, "smooth": args.smooth,
         "standardize": args.standardize, "adf_lag": args.adf_lag,
         "out": str(out), "report": str(report_path)},
        None, {"in": args.infile}, __version__,
    )

    processed = []
    reports = {}
    for series in dataset.series:
        current = series
        if args.deseasonalize is not None:
            try:
                current = deseasonalize(current, args.deseasonalize)
            except ValueError as exc:
                raise CliError("column-too-short",
                               f"column {series.name!r}: {exc}")
        if args.smooth is not None:
            current = exp_smooth(current, args.smooth)
        if args.standardize:
            if np.ptp(current.values) == 0.0:
                logger.warning("column %r is constant; standardization skipped",
                               series.name)
            else:
                current = standardize(current)
        processed.append(current)
        rep = stationarity_report(current, lag_order=args.adf_lag)
        reports[series.name] = {
            "adf_statistic": None if np.isnan(rep.adf_statistic) else rep.adf_statistic,
            "adf_reject_5pct": rep.adf_reject_5pct,
            "split_mean_gap": (None if not np.isfinite(rep.split_mean_gap)
                               else rep.split_mean_gap),
            "split_variance_ratio": (None if not np.isfinite(rep.split_variance_ratio)
                                     else rep.split_variance_ratio),
            "verdict": rep.verdict,
        }

    result = MultivariateDataset(
        series=tuple(processed),
        provenance=dataset.provenance + " | preprocessed",
        time_name=dataset.time_name,
    )
    write_csv(result, out)
    _write_json(report_path, {"manifest": manifest, "columns": reports})
    _finish(manifest, [out, report_path], started,
            out.with_suffix(out.suffix + ".manifest.json"))
    return 0


# --- ccm ----------------------------------------------------------------------

def _resolve_embedding(args, dataset) -> tuple[int, dict | None]:
    if args.e != "auto":
        try:
            e_val = int(args.e)
        except ValueError:
            raise CliError("bad-e", f"--e must be 'auto' or an integer, got {args.e!r}")
        if e_val < 1:
            raise CliError("bad-e", f"--e must be >= 1, got {e_val}")
        return e_val, None
    probe_name = args.target if args.target else dataset.names[0]
    selection = select_embedding(dataset.column(probe_name), range(1, 11),
                                 tau=args.tau, tp=args.tp,
                                 theiler_window=args.theiler)
    info = {"series": probe_name, "best_E": selection.best_E,
            "curve": [[E, rho] for E, rho in selection.skill_curve]}
    return selection.best_E, info


def _safe_name(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in name)


def cmd_ccm(args) -> int:
    started = time.perf_counter()
    dataset = load_csv(args.infile, args.time_column)
    if args.target is not None and args.target not in dataset.names:
        raise CliError(
            "unknown-column",
            f"target {args.target!r} not in dataset; available: "
            f"{', '.join(dataset.names)}",
        )

    e_val, selection_info = _resolve_embedding(args, dataset)
    try:
        emb = EmbeddingConfig(E=e_val, tau=args.tau, tp=args.tp,
                              theiler_window=args.theiler)
        usable = len(embed(dataset.column(dataset.names[0]), emb))
        lib_sizes = _parse_lib_sizes(args.lib_sizes)
        if lib_sizes is None:
            lib_sizes = default_lib_sizes(usable, e_val)
        config = CcmConfig(embedding=emb, lib_sizes=lib_sizes,
                           replicates=args.replicates, rng_seed=args.seed)
        if lib_sizes[-1] > usable:
            raise ValueError(
                f"max library size {lib_sizes[-1]} exceeds usable manifold "
                f"size {usable}"
            )
    except ValueError as exc:
        raise CliError("infeasible-embedding", str(exc))

    out = Path(args.out)
    manifest_args = {
        "in": str(args.infile), "time_column": args.time_column,
        "target": args.target, "pairs": args.pairs, "e": e_val,
        "tau": args.tau, "tp": args.tp, "theiler": args.theiler,
        "lib_sizes": list(lib_sizes), "replicates": args.replicates,
        "jobs": args.jobs, "out": str(out), "svg": args.svg,
    }
    if selection_info is not None:
        manifest_args["embedding_selection"] = selection_info
    manifest = build_manifest("ccm", manifest_args, args.seed,
                              {"in": args.infile}, __version__)

    graph = ccm_pairwise(dataset, config, target=args.target, n_jobs=args.jobs)
    payload = ccm_graph_to_json(graph, manifest)

    outputs = [out]
    _write_json(out, payload)

    curves_dir = Path(args.curves_dir) if args.curves_dir else out.parent / (out.stem + ".curves")
    curves_dir.mkdir(parents=True, exist_ok=True)
    for r in graph.results:
        path = curves_dir / f"{_safe_name(r.source_name)}_to_{_safe_name(r.target_name)}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["lib_size", "rho_mean", "rho_sd"])
            for s in r.curve:
                writer.writerow([s.lib_size, repr(s.rho_mean), repr(s.rho_sd)])
        outputs.append(path)

    if args.svg:
        svg_dir = Path(args.svg)
        svg_dir.mkdir(parents=True, exist_ok=True)
        seen = set()
        for r in graph.results:
            pair = tuple(sorted((r.source_name, r.target_name)))
            if pair in seen:
                continue
            seen.add(pair)
            members = [x for x in graph.results
                       if tuple(sorted((x.source_name, x.target_name))) == pair]
            curves = [{
                "label": f"{m.source_name} from M_{m.target_name}",
                "lib_sizes": [s.lib_size for s in m.curve],
                "rho_mean": [s.rho_mean for s in m.curve],
                "rho_sd": [s.rho_sd for s in m.curve],
            } for m in members]
            svg = render_convergence_svg(
                curves, title=f"{pair[0]} ~ {pair[1]}",
                manifest_ref=f"manifest:{manifest['id']}",
            )
            path = svg_dir / f"{_safe_name(pair[0])}_vs_{_safe_name(pair[1])}.svg"
            path.write_text(svg, encoding="utf-8")
            outputs.append(path)

    _finish(manifest, outputs, started, out.with_suffix(out.suffix + ".manifest.json"))
    return 0


# --- granger --------------------------------------------------------------------

def cmd_granger(args) -> int:
    started = time.perf_counter()
    if args.max_lag < 1:
        raise CliError("bad-max-lag", f"--max-lag must be >= 1, got {args.max_lag}")
    dataset = load_csv(args.infile, args.time_column)
    out = Path(args.out)
    manifest = build_manifest(
        "granger",
        {"in": str(args.infile), "time_column": args.time_column,
         "max_lag": args.max_lag, "out": str(out)},
        None, {"in": args.infile}, __version__,
    )
    try:
        graph = granger_pairwise(dataset, args.max_lag)
    except ValueError as exc:
        raise CliError("insufficient-length", str(exc))
    payload = granger_graph_to_json(graph, manifest)
    _write_json(out, payload)

    # Wide CSV mirror: one row per lag, one column per ordered pair.
    csv_path = out.with_suffix(".csv")
    pair_labels = [f"{r.cause_name}->{r.effect_name}" for r in graph.results]
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lag", *pair_labels])
        for lag in range(1, args.max_lag + 1):
            row = [lag]
            for r in graph.results:
                t = r.per_lag[lag - 1]
                row.append("" if t.singular else repr(t.p_value))
            writer.writerow(row)

    _finish(manifest, [out, csv_path], started,
            out.with_suffix(out.suffix + ".manifest.json"))
    return 0


# --- evaluate --------------------------------------------------------------------

def cmd_evaluate(args) -> int:
    started = time.perf_counter()
    truth = json.loads(Path(args.truth).read_text(encoding="utf-8"))
    results = json.loads(Path(args.results).read_text(encoding="utf-8"))
    manifest = build_manifest(
        "evaluate",
        {"truth": str(args.truth), "results": str(args.results),
         "out": str(args.out)},
        None, {"truth": args.truth, "results": args.results}, __version__,
    )
    try:
        report = evaluate_detections(truth, results)
    except ValueError as exc:
        raise CliError("node-set-mismatch", str(exc))
    out = Path(args.out)
    payload = {"manifest": manifest, **report.to_json_dict()}
    _write_json(out, payload)
    print(report.table())
    _finish(manifest, [out], started, out.with_suffix(out.suffix + ".manifest.json"))
    return 0


# --- plot ------------------------------------------------------------------------

def _read_curve_csv(path: Path) -> dict:
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:3] != ["lib_size", "rho_mean", "rho_sd"]:
            raise CliError("bad-curve-file",
                           f"{path}: expected header lib_size,rho_mean,rho_sd")
        sizes, means, sds = [], [], []
        for row in reader:
            if not row:
                continue
            try:
                sizes.append(int(row[0]))
                means.append(float(row[1]))
                sds.append(float(row[2]))
            except (ValueError, IndexError):
                raise CliError("bad-curve-file", f"{path}: malformed row {row}")
    if not sizes:
        raise CliError("bad-curve-file", f"{path}: no data rows")
    return {"label": path.stem, "lib_sizes": sizes, "rho_mean": means,
            "rho_sd": sds}


def cmd_plot(args) -> int:
    started = time.perf_counter()
    curves = [_read_curve_csv(Path(p)) for p in args.curves]
    manifest = build_manifest(
        "plot", {"curves": [str(p) for p in args.curves], "out": str(args.out)},
        None, {f"curve{i}": p for i, p in enumerate(args.curves)}, __version__,
    )
    svg = render_convergence_svg(curves, manifest_ref=f"manifest:{manifest['id']}")
    out = Path(args.out)
    out.write_text(svg, encoding="utf-8")
    _finish(manifest, [out], started, out.with_suffix(out.suffix + ".manifest.json"))
    return 0


# --- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ccmcausal",
        description="Causal discovery for nonlinear time series "
                    "(convergent cross mapping + Granger baseline)",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the synthetic benchmark system")
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--noise-sd", type=float, default=0.1)
    p.add_argument("--burn-in", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--contemporaneous", choices=("ordered", "previous"),
                   default="ordered")
    p.add_argument("--out", required=True)
    p.add_argument("--truth", default=None,
                   help="ground-truth JSON path (default: <out>.truth.json)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("preprocess", help="deseasonalize/smooth/standardize")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--time-column", default="time")
    p.add_argument("--deseasonalize", type=int, default=None, metavar="PERIOD")
    p.add_argument("--smooth", type=float, default=None, metavar="ALPHA")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--adf-lag", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None,
                   help="stationarity report path (default: <out>.stationarity.json)")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("ccm", help="convergent cross mapping scan")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--time-column", default="time")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--target", default=None,
                       help="hub scan: every other column against this one")
    group.add_argument("--pairs", choices=("all",), default=None,
                       help="scan all unordered pairs")
    p.add_argument("--e", default="auto",
                   help="embedding dimension, or 'auto' to select by forecast skill")
    p.add_argument("--tau", type=int, default=1)
    p.add_argument("--tp", type=int, default=1)
    p.add_argument("--theiler", type=int, default=0)
    p.add_argument("--lib-sizes", default=None,
                   help="comma-separated library sizes (default: 10 geometric)")
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--curves-dir", default=None,
                   help="directory for per-pair curve CSVs (default: <out stem>.curves)")
    p.add_argument("--svg", default=None, metavar="DIR",
                   help="also write per-pair convergence SVGs into DIR")
    p.set_defaults(func=cmd_ccm)

    p = sub.add_parser("granger", help="pairwise Granger-causality scan")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--time-column", default="time")
    p.add_argument("--max-lag", type=int, default=12)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_granger)

    p = sub.add_parser("evaluate", help="score detections against ground truth")
    p.add_argument("--truth", required=True)
    p.add_argument("--results", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("plot", help="render convergence-curve CSVs as one SVG")
    p.add_argument("curves", nargs="+", metavar="CURVE_CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(json.dumps({"error": {"code": exc.code, "message": str(exc)}}),
              file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError) as exc:
        print(json.dumps({"error": {"code": "invalid-input", "message": str(exc)}}),
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
