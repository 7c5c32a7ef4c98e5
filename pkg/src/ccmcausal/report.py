"""Result serialization and reporting: the shared JSON schema for CCM and
Granger scans, run manifests, detection scoring against a ground-truth
graph, and deterministic SVG convergence plots.

Result JSON schema (top level):
    {manifest, method, nodes,
     results: [{source, target, p_value, rho_max_lib, significant,
                curve: [{lib_size, rho_mean, rho_sd}]}],
     feedback_pairs: [[a, b], ...]}
Granger results omit `curve` and `rho_max_lib` and carry `lag` plus
`per_lag: [{lag, f_statistic, p_value, singular}]` instead.

All emitters are deterministic: identical inputs give identical bytes. The
run manifest embedded in result files holds only deterministic fields; the
wall-clock duration lives in the sidecar manifest file alone.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .ccm import CausalGraph, CcmResult

__all__ = [
    "build_manifest",
    "manifest_id",
    "ccm_graph_to_json",
    "granger_graph_to_json",
    "EvaluationReport",
    "evaluate_detections",
    "render_convergence_svg",
    "curve_rows",
]


def _clean(value):
    """NaN/inf have no strict-JSON encoding; map them to null."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def build_manifest(command: str, args: dict, rng_seed: int | None,
                   input_paths: dict[str, str | Path],
                   version: str) -> dict:
    """Deterministic run manifest: command, resolved config, seed, input
    digests, and tool version. Duration is added by the caller only to the
    sidecar copy so result files stay byte-reproducible."""
    manifest = {
        "command": command,
        "args": {k: _clean(v) for k, v in sorted(args.items())},
        "rng_seed": rng_seed,
        "inputs": {name: _file_digest(p) for name, p in sorted(input_paths.items())},
        "tool": "ccmcausal",
        "version": version,
    }
    manifest["id"] = manifest_id(manifest)
    return manifest


def manifest_id(manifest: dict) -> str:
    payload = {k: v for k, v in manifest.items() if k not in ("id", "duration_seconds")}
    blob = json.dumps(payload, sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def ccm_graph_to_json(graph: CausalGraph, manifest: dict) -> dict:
    results = []
    for r in graph.results:
        results.append({
            "source": r.source_name,
            "target": r.target_name,
            "p_value": _clean(r.p_value),
            "rho_max_lib": _clean(r.rho_max_lib),
            "significant": r.significant,
            "degenerate": r.degenerate,
            "curve": [
                {"lib_size": s.lib_size, "rho_mean": _clean(s.rho_mean),
                 "rho_sd": _clean(s.rho_sd)}
                for s in r.curve
            ],
        })
    return {
        "manifest": manifest,
        "method": "ccm",
        "nodes": list(graph.nodes),
        "results": results,
        "feedback_pairs": [list(p) for p in graph.feedback_pairs],
    }


def granger_graph_to_json(graph: CausalGraph, manifest: dict) -> dict:
    by_pair = {(r.cause_name, r.effect_name): r for r in graph.results}
    results = []
    for edge in graph.edges:
        per_lag = [
            {"lag": t.lag, "f_statistic": _clean(t.f_statistic),
             "p_value": _clean(t.p_value), "singular": t.singular}
            for t in by_pair[(edge.source, edge.target)].per_lag
        ]
        results.append({
            "source": edge.source,
            "target": edge.target,
            "p_value": _clean(edge.p_value),
            "significant": edge.significant,
            "lag": edge.lag,
            "per_lag": per_lag,
        })
    return {
        "manifest": manifest,
        "method": "granger",
        "nodes": list(graph.nodes),
        "results": results,
        "feedback_pairs": [list(p) for p in graph.feedback_pairs],
        "notes": list(graph.notes),
    }


@dataclass(frozen=True)
class EvaluationReport:
    """Detection scores against a ground-truth graph.

    Directed edges and feedback pairs are scored separately. Self-edges in
    the ground truth (autoregressive terms) are excluded: pairwise scans
    never test a series against itself, so they are undetectable by
    construction and are reported in `excluded_self_edges` instead.
    """

    true_positives: tuple[tuple[str, str], ...]
    false_positives: tuple[tuple[str, str], ...]
    false_negatives: tuple[tuple[str, str], ...]
    precision: float
    recall: float
    f1: float
    feedback_true_positives: tuple[tuple[str, str], ...]
    feedback_false_positives: tuple[tuple[str, str], ...]
    feedback_false_negatives: tuple[tuple[str, str], ...]
    feedback_precision: float
    feedback_recall: float
    feedback_f1: float
    no_predictions: bool
    excluded_self_edges: tuple[tuple[str, str], ...] = ()

    def to_json_dict(self) -> dict:
        pairs = lambda seq: [list(p) for p in seq]  # noqa: E731
        return {
            "directed": {
                "true_positives": pairs(self.true_positives),
                "false_positives": pairs(self.false_positives),
                "false_negatives": pairs(self.false_negatives),
                "precision": self.precision,
                "recall": self.recall,
                "f1": self.f1,
            },
            "feedback": {
                "true_positives": pairs(self.feedback_true_positives),
                "false_positives": pairs(self.feedback_false_positives),
                "false_negatives": pairs(self.feedback_false_negatives),
                "precision": self.feedback_precision,
                "recall": self.feedback_recall,
                "f1": self.feedback_f1,
            },
            "no_predictions": self.no_predictions,
            "excluded_self_edges": pairs(self.excluded_self_edges),
        }

    def table(self) -> str:
        rows = [
            ("directed edges", self.precision, self.recall, self.f1,
             len(self.true_positives), len(self.false_positives),
             len(self.false_negatives)),
            ("feedback pairs", self.feedback_precision, self.feedback_recall,
             self.feedback_f1, len(self.feedback_true_positives),
             len(self.feedback_false_positives),
             len(self.feedback_false_negatives)),
        ]
        lines = [f"{'scope':<16}{'prec':>7}{'recall':>8}{'f1':>7}"
                 f"{'tp':>5}{'fp':>5}{'fn':>5}"]
        for name, p, r, f1, tp, fp, fn in rows:
            lines.append(f"{name:<16}{p:>7.3f}{r:>8.3f}{f1:>7.3f}"
                         f"{tp:>5}{fp:>5}{fn:>5}")
        if self.no_predictions:
            lines.append("note: no predicted edges; precision is 1 by the "
                         "empty-set convention")
        return "\n".join(lines)


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, bool]:
    no_pred = (tp + fp) == 0
    precision = 1.0 if no_pred else tp / (tp + fp)
    recall = 1.0 if (tp + fn) == 0 else tp / (tp + fn)
    return precision, recall, no_pred


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def evaluate_detections(truth: dict, results: dict) -> EvaluationReport:
    """Score a result JSON document against a ground-truth JSON document.

    `truth` follows GroundTruthGraph.to_json_dict(); `results` follows the
    result schema above. Node sets must match.
    """
    truth_nodes = set(truth["nodes"])
    result_nodes = set(results["nodes"])
    if truth_nodes != result_nodes:
        raise ValueError(
            f"node sets differ: truth has {sorted(truth_nodes)}, results "
            f"have {sorted(result_nodes)}"
        )

    truth_edges_all = {(e["source"], e["target"]) for e in truth["edges"]}
    self_edges = sorted(e for e in truth_edges_all if e[0] == e[1])
    truth_edges = {e for e in truth_edges_all if e[0] != e[1]}
    predicted = {(r["source"], r["target"]) for r in results["results"]
                 if r.get("significant")}

    tp = sorted(predicted & truth_edges)
    fp = sorted(predicted - truth_edges)
    fn = sorted(truth_edges - predicted)
    precision, recall, no_pred = _prf(len(tp), len(fp), len(fn))

    truth_fb = {tuple(sorted(p)) for p in truth.get("feedback_pairs", [])}
    pred_fb = {tuple(sorted(p)) for p in results.get("feedback_pairs", [])}
    fb_tp = sorted(pred_fb & truth_fb)
    fb_fp = sorted(pred_fb - truth_fb)
    fb_fn = sorted(truth_fb - pred_fb)
    fb_precision, fb_recall, _ = _prf(len(fb_tp), len(fb_fp), len(fb_fn))

    return EvaluationReport(
        true_positives=tuple(tp),
        false_positives=tuple(fp),
        false_negatives=tuple(fn),
        precision=precision,
        recall=recall,
        f1=_f1(precision, recall),
        feedback_true_positives=tuple(fb_tp),
        feedback_false_positives=tuple(fb_fp),
        feedback_false_negatives=tuple(fb_fn),
        feedback_precision=fb_precision,
        feedback_recall=fb_recall,
        feedback_f1=_f1(fb_precision, fb_recall),
        no_predictions=no_pred,
        excluded_self_edges=tuple(self_edges),
    )


# --- SVG convergence plots -------------------------------------------------

_PALETTE = ("#1b6ca8", "#c0392b", "#27ae60", "#8e44ad",
            "#d35400", "#16a085", "#7f8c8d", "#2c3e50")

_WIDTH, _HEIGHT = 800, 600
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 30, 40, 60


def curve_rows(result: CcmResult) -> list[tuple[int, float, float]]:
    """(lib_size, rho_mean, rho_sd) rows of a CCM result, CSV-ready."""
    return [(s.lib_size, s.rho_mean, s.rho_sd) for s in result.curve]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_convergence_svg(curves: list[dict], title: str = "",
                           manifest_ref: str = "") -> str:
    """Deterministic SVG of cross-map skill vs library size.

    Each entry of `curves` needs keys label, lib_sizes, rho_mean, rho_sd;
    every curve is drawn as a mean polyline plus a +-1 sd band polyline.
    Identical input yields identical bytes.
    """
    if not curves:
        raise ValueError("need at least one curve to plot")
    for c in curves:
        if not c["lib_sizes"]:
            raise ValueError(f"curve {c.get('label', '?')!r} is empty")

    xs_all = [x for c in curves for x in c["lib_sizes"]]
    lo_y = min(m - s for c in curves for m, s in zip(c["rho_mean"], c["rho_sd"]))
    hi_y = max(m + s for c in curves for m, s in zip(c["rho_mean"], c["rho_sd"]))
    lo_y, hi_y = min(lo_y, 0.0), max(hi_y, 1.0)
    pad = 0.05 * (hi_y - lo_y)
    lo_y, hi_y = lo_y - pad, hi_y + pad
    lo_x, hi_x = min(xs_all), max(xs_all)
    if hi_x == lo_x:
        hi_x = lo_x + 1

    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def sx(x):
        return _MARGIN_L + (x - lo_x) / (hi_x - lo_x) * plot_w

    def sy(y):
        return _MARGIN_T + (hi_y - y) / (hi_y - lo_y) * plot_h

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f"<desc>{manifest_ref}</desc>" if manifest_ref else "<desc/>",
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
    ]
    # Axes.
    x0, y0 = _MARGIN_L, _HEIGHT - _MARGIN_B
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{_WIDTH - _MARGIN_R}" '
                 f'y2="{y0}" stroke="black" stroke-width="1"/>')
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{_MARGIN_T}" '
                 f'stroke="black" stroke-width="1"/>')
    for i in range(5):
        xv = lo_x + (hi_x - lo_x) * i / 4
        xpix = _fmt(sx(xv))
        parts.append(f'<line x1="{xpix}" y1="{y0}" x2="{xpix}" y2="{y0 + 5}" '
                     f'stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{xpix}" y="{y0 + 20}" font-size="12" '
                     f'text-anchor="middle">{int(round(xv))}</text>')
        yv = lo_y + (hi_y - lo_y) * i / 4
        ypix = _fmt(sy(yv))
        parts.append(f'<line x1="{x0 - 5}" y1="{ypix}" x2="{x0}" y2="{ypix}" '
                     f'stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{x0 - 10}" y="{ypix}" font-size="12" '
                     f'text-anchor="end" dominant-baseline="middle">'
                     f'{yv:.2f}</text>')
    parts.append(f'<text x="{(_MARGIN_L + _WIDTH - _MARGIN_R) // 2}" '
                 f'y="{_HEIGHT - 15}" font-size="14" text-anchor="middle">'
                 f'library size</text>')
    parts.append(f'<text x="20" y="{(_MARGIN_T + _HEIGHT - _MARGIN_B) // 2}" '
                 f'font-size="14" text-anchor="middle" '
                 f'transform="rotate(-90 20 '
                 f'{(_MARGIN_T + _HEIGHT - _MARGIN_B) // 2})">'
                 f'cross-map skill (rho)</text>')
    if title:
        parts.append(f'<text x="{_WIDTH // 2}" y="25" font-size="16" '
                     f'text-anchor="middle">{title}</text>')

    for i, c in enumerate(curves):
        color = _PALETTE[i % len(_PALETTE)]
        upper = [(sx(x), sy(m + s)) for x, m, s in
                 zip(c["lib_sizes"], c["rho_mean"], c["rho_sd"])]
        lower = [(sx(x), sy(m - s)) for x, m, s in
                 zip(c["lib_sizes"], c["rho_mean"], c["rho_sd"])]
        band_pts = " ".join(f"{_fmt(px)},{_fmt(py)}"
                            for px, py in upper + lower[::-1])
        parts.append(f'<polyline points="{band_pts}" fill="{color}" '
                     f'fill-opacity="0.15" stroke="none"/>')
        mean_pts = " ".join(
            f"{_fmt(sx(x))},{_fmt(sy(m))}"
            for x, m in zip(c["lib_sizes"], c["rho_mean"])
        )
        parts.append(f'<polyline points="{mean_pts}" fill="none" '
                     f'stroke="{color}" stroke-width="2"/>')
        # Legend entry.
        ly = _MARGIN_T + 18 * i
        lx = _WIDTH - _MARGIN_R - 170
        parts.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 30}" y="{ly + 4}" font-size="12">'
                     f'{c["label"]}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
