"""Feature tables, repeatability reports, run manifests and Bland-Altman SVGs.

Every table is written twice, as CSV and as JSON, carrying the same values:
floats are written with ``repr`` (round-trip exact), NaN becomes an empty CSV
cell or JSON ``null``, and booleans are ``true``/``false``. The CSV starts
with a ``# manifest_sha256=...`` comment line.
"""

from __future__ import annotations

import csv
import errno
import hashlib
import io
import json
import math
import os
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InputError, InsufficientDataError
from .repeatability import (PairedSeries, ReliabilityThresholds, bland_altman, icc,
                            percent_differences, reliability_category, spearman)

REPORT_COLUMNS = (
    "feature_id", "n", "mean_pct", "sd_pct", "lower_pct", "upper_pct", "normal",
    "log_transformed", "category", "icc", "spearman_vs_volume", "spearman_vs_max_intensity",
    "n_excluded", "n_outliers",
)
_INT_COLUMNS = {"n", "n_excluded", "n_outliers"}
_BOOL_COLUMNS = {"normal", "log_transformed"}
_STR_COLUMNS = {"feature_id", "category", "lesion_id"}
UNDEFINED = "undefined"


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def build_manifest(command: str, inputs, quantizations=(), lesion_ids=()) -> tuple[dict, str]:
    """Manifest dict and its hash; the timestamp is excluded from the hash."""
    manifest = {
        "tool": "radiorepeat",
        "version": __version__,
        "command": command,
        "inputs": [{"name": Path(p).name, "sha256": sha256_file(p)} for p in inputs],
        "quantizations": list(quantizations),
        "lesion_ids": list(lesion_ids),
    }
    digest = hashlib.sha256(json.dumps(manifest, sort_keys=True).encode()).hexdigest()
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    stamp = time.gmtime(int(epoch)) if epoch else time.gmtime()
    manifest["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", stamp)
    manifest["sha256"] = digest
    return manifest, digest


def write_manifest(manifest: dict, path) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    return str(value)


def _json_value(value):
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def _parse_cell(column: str, text: str):
    if column in _STR_COLUMNS:
        return text
    if column in _BOOL_COLUMNS:
        return text == "true"
    if column in _INT_COLUMNS:
        return int(text)
    return float(text) if text != "" else float("nan")


def write_table(rows: list[dict], columns, csv_path, manifest_sha: str, extra: dict | None = None) -> Path:
    """Write ``rows`` to ``csv_path`` and its JSON mirror; returns the JSON path."""
    csv_path = Path(csv_path)
    buf = io.StringIO()
    buf.write(f"# manifest_sha256={manifest_sha}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in columns])
    csv_path.write_text(buf.getvalue())

    doc = {"manifest_sha256": manifest_sha, "columns": list(columns),
           "rows": [{c: _json_value(row[c]) for c in columns} for row in rows]}
    if extra:
        doc.update(extra)
    json_path = csv_path.with_suffix(".json")
    json_path.write_text(json.dumps(doc, indent=1) + "\n")
    return json_path


def read_table(path) -> tuple[list[str], list[dict]]:
    """Read a CSV or JSON table written by :func:`write_table`."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(errno.ENOENT, "no such file", str(path))
    if path.suffix.lower() == ".json":
        doc = json.loads(path.read_text())
        columns = doc["columns"]
        rows = [{c: (float("nan") if r[c] is None else r[c]) for c in columns} for r in doc["rows"]]
        return columns, rows
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    reader = csv.reader(lines)
    try:
        columns = next(reader)
    except StopIteration:
        raise InputError("empty table", str(path)) from None
    rows = []
    for rec in reader:
        if len(rec) != len(columns):
            raise InputError(f"row has {len(rec)} cells, header has {len(columns)}", str(path))
        rows.append({c: _parse_cell(c, v) for c, v in zip(columns, rec)})
    return columns, rows


@dataclass
class RepeatabilityReport:
    rows: list[dict]
    voi_feature: str
    voi_rep_sd: float
    points: dict[str, dict[str, list]]

    def row(self, feature_id: str) -> dict:
        return next(r for r in self.rows if r["feature_id"] == feature_id)


def _nan_row(feature_id: str, n: int, n_excluded: int = 0) -> dict:
    nan = float("nan")
    return {"feature_id": feature_id, "n": n, "mean_pct": nan, "sd_pct": nan, "lower_pct": nan,
            "upper_pct": nan, "normal": False, "log_transformed": False, "category": UNDEFINED,
            "icc": nan, "spearman_vs_volume": nan, "spearman_vs_max_intensity": nan,
            "n_excluded": n_excluded, "n_outliers": 0}


def _rank_corr(abs_diff, covariate) -> float:
    if covariate is None or len(abs_diff) < 4:
        return float("nan")
    res = spearman(abs_diff, covariate)
    return res.rs if res.defined else float("nan")


def compare_tables(test_rows: list[dict], retest_rows: list[dict], features,
                   voi_feature: str = "shape.volume_ml", voi_rep_sd: float | None = None,
                   max_feature: str = "fo.max") -> RepeatabilityReport:
    """Repeatability report over lesions present in both tables."""
    test_by_id = {r["lesion_id"]: r for r in test_rows}
    retest_by_id = {r["lesion_id"]: r for r in retest_rows}
    if set(test_by_id) != set(retest_by_id):
        missing = sorted(set(test_by_id) ^ set(retest_by_id))
        raise InputError(f"lesion ids differ between test and retest tables: {missing}")
    ids = [r["lesion_id"] for r in test_rows]
    if len(ids) < 3:
        raise InsufficientDataError(f"need at least 3 common lesions, got {len(ids)}")

    def series(feature):
        return PairedSeries(feature, [test_by_id[i][feature] for i in ids],
                            [retest_by_id[i][feature] for i in ids])

    if voi_feature not in features:
        raise InputError(f"volume feature {voi_feature!r} is not in the tables")
    voi = series(voi_feature)
    if voi_rep_sd is None:
        voi_rep_sd = bland_altman(voi).sd_pct
    thresholds = ReliabilityThresholds(voi_rep_sd)
    volume = 0.5 * (voi.test + voi.retest)
    max_int = None
    if max_feature in features:
        mx = series(max_feature)
        max_int = 0.5 * (mx.test + mx.retest)

    rows, points = [], {}
    for feature in features:
        s = series(feature)
        d, n_excluded = percent_differences(s)
        keep = 0.5 * (s.test + s.retest) != 0
        points[feature] = {"lesion_id": [i for i, k in zip(ids, keep) if k],
                           "mean": [float(v) for v in (0.5 * (s.test + s.retest))[keep]],
                           "diff_pct": [float(v) for v in d]}
        try:
            try:
                ba = bland_altman(s)
            except InputError:
                # non-positive values rule out log ratios; keep the direct limits
                ba = bland_altman(s, log_fallback=False)
        except InsufficientDataError:
            rows.append(_nan_row(feature, len(d), n_excluded))
            continue
        abs_d = np.abs(d)
        rows.append({
            "feature_id": feature,
            "n": ba.n,
            "mean_pct": ba.mean_pct,
            "sd_pct": ba.sd_pct,
            "lower_pct": ba.lower_limit_pct,
            "upper_pct": ba.upper_limit_pct,
            "normal": ba.normal,
            "log_transformed": ba.log_transformed,
            "category": reliability_category(ba.sd_pct, thresholds).value,
            "icc": float(icc(s)),
            "spearman_vs_volume": _rank_corr(abs_d, volume[keep]),
            "spearman_vs_max_intensity": _rank_corr(abs_d, None if max_int is None else max_int[keep]),
            "n_excluded": ba.n_excluded,
            "n_outliers": ba.n_outliers,
        })
    return RepeatabilityReport(rows, voi_feature, float(voi_rep_sd), points)


def write_report(report: RepeatabilityReport, csv_path, manifest_sha: str) -> Path:
    t = ReliabilityThresholds(report.voi_rep_sd)
    extra = {
        "voi_feature": report.voi_feature,
        "voi_rep_sd": report.voi_rep_sd,
        "thresholds": {"very_reliable": t.cut_very, "reliable": t.cut_reliable,
                       "moderately_reliable": t.cut_moderate},
        "points": report.points,
    }
    return write_table(report.rows, REPORT_COLUMNS, csv_path, manifest_sha, extra)


def load_report(path) -> RepeatabilityReport:
    doc = json.loads(Path(path).read_text())
    rows = [{c: (float("nan") if r[c] is None else r[c]) for c in doc["columns"]} for r in doc["rows"]]
    return RepeatabilityReport(rows, doc["voi_feature"], doc["voi_rep_sd"], doc["points"])


# --- SVG ---------------------------------------------------------------------

_W, _H = 640, 420
_LEFT, _RIGHT, _TOP, _BOTTOM = 70, 20, 40, 50


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def bland_altman_svg(feature_id: str, means, diffs, mean_pct: float, lower: float, upper: float) -> str:
    """Static Bland-Altman scatter: pair mean on x, percent difference on y."""
    means = np.asarray(means, dtype=np.float64)
    diffs = np.asarray(diffs, dtype=np.float64)
    finite = [v for v in (mean_pct, lower, upper) if math.isfinite(v)]
    y_all = np.concatenate([diffs, finite]) if len(diffs) or finite else np.array([0.0])
    y_lo, y_hi = float(y_all.min()), float(y_all.max())
    pad = 0.1 * (y_hi - y_lo) or 1.0
    y_lo, y_hi = y_lo - pad, y_hi + pad
    x_lo, x_hi = (float(means.min()), float(means.max())) if len(means) else (0.0, 1.0)
    xpad = 0.05 * (x_hi - x_lo) or 1.0
    x_lo, x_hi = x_lo - xpad, x_hi + xpad

    def px(x):
        return _LEFT + (x - x_lo) / (x_hi - x_lo) * (_W - _LEFT - _RIGHT)

    def py(y):
        return _TOP + (y_hi - y) / (y_hi - y_lo) * (_H - _TOP - _BOTTOM)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_W} {_H}" width="{_W}" height="{_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.0f}" y="22" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14">{_escape(feature_id)}</text>',
        f'<line x1="{_LEFT}" y1="{_H - _BOTTOM}" x2="{_W - _RIGHT}" y2="{_H - _BOTTOM}" stroke="black"/>',
        f'<line x1="{_LEFT}" y1="{_TOP}" x2="{_LEFT}" y2="{_H - _BOTTOM}" stroke="black"/>',
        f'<text x="{_W / 2:.0f}" y="{_H - 12}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12">mean of test and retest</text>',
        f'<text x="18" y="{_H / 2:.0f}" text-anchor="middle" font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 18 {_H / 2:.0f})">difference (%)</text>',
    ]
    for label, value, dash in (("mean", mean_pct, ""), ("-1.96 SD", lower, ' stroke-dasharray="6 4"'),
                               ("+1.96 SD", upper, ' stroke-dasharray="6 4"')):
        if not math.isfinite(value):
            continue
        y = py(value)
        out.append(f'<line x1="{_LEFT}" y1="{_fmt(y)}" x2="{_W - _RIGHT}" y2="{_fmt(y)}" '
                   f'stroke="firebrick"{dash}/>')
        out.append(f'<text x="{_W - _RIGHT - 4}" y="{_fmt(y - 4)}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{label} {value:.1f}%</text>')
    for x, y in zip(means, diffs):
        out.append(f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="3" fill="steelblue"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_plots(report: RepeatabilityReport, features, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for feature in features:
        if feature not in report.points:
            raise InputError(f"no report data for feature {feature!r}")
        row = report.row(feature)
        pts = report.points[feature]
        svg = bland_altman_svg(feature, pts["mean"], pts["diff_pct"], row["mean_pct"],
                               row["lower_pct"], row["upper_pct"])
        path = out_dir / f"bland_altman_{feature.replace('@', '_at_')}.svg"
        path.write_text(svg)
        paths.append(path)
    return paths
