"""Structured JSON documents shared by the CLI, the service, and tests.

Every document carries the same envelope: {"format": "leafbite/<kind>",
"version": 1, ...payload}.  Field names follow the domain types
verbatim.  NaN never appears in a document; undefined numbers become
null."""

from __future__ import annotations

import json
import math

from .analytics import CorrelationResult, MeasurementSeries, format_p_value
from .errors import DocumentError
from .fsio import atomic_write_text
from .geometry import QuadraticBezier
from .pipeline import AnalysisConfig, AnalysisResult
from .quantify import DamageReport
from .segmentation import OtsuDiagnostics
from .synth import Disk, GroundTruth, SyntheticLeafSpec

FORMAT_PREFIX = "leafbite/"
VERSION = 1

RESULT = "result"
SESSION = "session"
CURVES = "curves"
GROUND_TRUTH = "ground-truth"
LEAF_SPEC = "leaf-spec"
PLOT_DATA = "plot-data"


def make_document(kind: str, payload: dict) -> dict:
    return {"format": FORMAT_PREFIX + kind, "version": VERSION, **payload}


def check_document(doc, kind: str) -> dict:
    if not isinstance(doc, dict):
        raise DocumentError(f"expected a document object, got {type(doc).__name__}")
    fmt = doc.get("format")
    if fmt != FORMAT_PREFIX + kind:
        raise DocumentError(f"expected format {FORMAT_PREFIX + kind!r}, got {fmt!r}")
    if doc.get("version") != VERSION:
        raise DocumentError(f"unsupported document version {doc.get('version')!r}")
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def loads(text: str, kind: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return check_document(doc, kind)


def write_document(path, kind: str, payload: dict) -> None:
    atomic_write_text(path, dumps(make_document(kind, payload)))


def read_document(path, kind: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DocumentError(f"{path}: {exc}") from exc
    try:
        return loads(text, kind)
    except DocumentError as exc:
        raise DocumentError(f"{path}: {exc}") from exc


def _num(x):
    """NaN/inf to null; everything else passes through."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def report_payload(report: DamageReport) -> dict:
    return {
        "leaf_foreground_px": report.leaf_foreground_px,
        "internal_damage_px": report.internal_damage_px,
        "border_damage_px": report.border_damage_px,
        "total_leaf_px": report.total_leaf_px,
        "damage_ratio": round(report.damage_ratio, 4),
        "total_cm2": _num(report.total_cm2),
        "damage_cm2": _num(report.damage_cm2),
    }


def diagnostics_payload(diag: OtsuDiagnostics) -> dict:
    return {
        "threshold": diag.threshold,
        "auto_threshold": diag.auto_threshold,
        "overridden": diag.overridden,
        "omega0": _num(diag.omega0),
        "omega1": _num(diag.omega1),
        "mu0": _num(diag.mu0),
        "mu1": _num(diag.mu1),
        "global_mean": _num(diag.global_mean),
        "variance_curve": [_num(v) for v in diag.variance_curve],
    }


def config_payload(config: AnalysisConfig) -> dict:
    return {
        "channel": config.channel,
        "polarity": config.polarity,
        "threshold": config.threshold,
        "min_size": config.min_size,
        "min_hole_size": config.min_hole_size,
        "pixels_per_cm": config.pixels_per_cm,
    }


def parse_config(obj: dict, base: AnalysisConfig = AnalysisConfig()) -> AnalysisConfig:
    """Merge a (partial) config object over ``base``."""
    if not isinstance(obj, dict):
        raise DocumentError("config must be an object")
    allowed = {"channel", "polarity", "threshold", "min_size", "min_hole_size", "pixels_per_cm"}
    unknown = set(obj) - allowed
    if unknown:
        raise DocumentError(f"unknown config fields: {sorted(unknown)}")
    try:
        return base.merged(**obj)
    except (ValueError, TypeError) as exc:
        raise DocumentError(str(exc)) from exc


def curve_payload(curve: QuadraticBezier) -> dict:
    return {"control_points": [[p.x, p.y] for p in curve.control_points]}


def parse_curve(obj) -> QuadraticBezier:
    if not isinstance(obj, dict) or "control_points" not in obj:
        raise DocumentError("curve must be an object with control_points")
    pts = obj["control_points"]
    if not isinstance(pts, list) or len(pts) != 3:
        raise DocumentError(f"a curve needs exactly 3 control points, got {len(pts) if isinstance(pts, list) else pts!r}")
    try:
        return QuadraticBezier(tuple(pts[0]), tuple(pts[1]), tuple(pts[2]))
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"bad control points: {exc}") from exc


def outcome_payload(curve: QuadraticBezier, outcome) -> dict:
    return {
        "control_points": [[p.x, p.y] for p in curve.control_points],
        "status": outcome.status,
        "reason": outcome.reason,
        "border_damage_px": int(len(outcome.pixels)),
    }


def result_payload(result: AnalysisResult, curves=()) -> dict:
    """The shared result body; the service adds session id and revision
    on top, the CLI writes it as-is."""
    curve_entries = []
    for curve, outcome in zip(curves, result.curve_outcomes):
        curve_entries.append(outcome_payload(curve, outcome))
    return {
        "config": config_payload(result.config),
        "needs_threshold": result.needs_threshold,
        "report": report_payload(result.report) if result.report is not None else None,
        "diagnostics": diagnostics_payload(result.diagnostics) if result.diagnostics is not None else None,
        "curves": curve_entries,
    }


def curves_file_payload(per_image: dict) -> dict:
    """per_image maps an image path (as given on the command line) to a
    list of QuadraticBezier."""
    return {
        "images": {
            str(path): [curve_payload(c) for c in curves] for path, curves in per_image.items()
        }
    }


def parse_curves_file(doc: dict) -> dict:
    check_document(doc, CURVES)
    images = doc.get("images")
    if not isinstance(images, dict):
        raise DocumentError("curves document needs an 'images' object")
    out = {}
    for path, entries in images.items():
        if not isinstance(entries, list):
            raise DocumentError(f"curve list for {path!r} must be an array")
        out[path] = [parse_curve(e) for e in entries]
    return out


def disk_payload(d: Disk) -> list:
    return [d.cx, d.cy, d.r]


def _parse_disk(obj) -> Disk:
    if not isinstance(obj, (list, tuple)) or len(obj) != 3:
        raise DocumentError(f"a disk is a [cx, cy, r] triple, got {obj!r}")
    return Disk(float(obj[0]), float(obj[1]), float(obj[2]))


def leaf_spec_payload(spec: SyntheticLeafSpec) -> dict:
    return {
        "width": spec.width,
        "height": spec.height,
        "center": list(spec.center),
        "semi_axes": list(spec.semi_axes),
        "exponent": spec.exponent,
        "leaf_color": list(spec.leaf_color),
        "background_color": list(spec.background_color),
        "holes": [disk_payload(d) for d in spec.holes],
        "bites": [disk_payload(d) for d in spec.bites],
        "speckles": [disk_payload(d) for d in spec.speckles],
        "seed": spec.seed,
    }


def parse_leaf_spec(doc: dict) -> SyntheticLeafSpec:
    check_document(doc, LEAF_SPEC)
    try:
        return SyntheticLeafSpec(
            width=int(doc["width"]),
            height=int(doc["height"]),
            center=(float(doc["center"][0]), float(doc["center"][1])),
            semi_axes=(float(doc["semi_axes"][0]), float(doc["semi_axes"][1])),
            exponent=float(doc.get("exponent", 2.0)),
            leaf_color=tuple(int(v) for v in doc.get("leaf_color", (34, 139, 34))),
            background_color=tuple(int(v) for v in doc.get("background_color", (244, 243, 238))),
            holes=tuple(_parse_disk(d) for d in doc.get("holes", [])),
            bites=tuple(_parse_disk(d) for d in doc.get("bites", [])),
            speckles=tuple(_parse_disk(d) for d in doc.get("speckles", [])),
            seed=int(doc.get("seed", 0)),
        )
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise DocumentError(f"bad leaf spec: {exc!r}") from exc


def ground_truth_payload(truth: GroundTruth) -> dict:
    return {
        "leaf_px_total": truth.leaf_px_total,
        "internal_damage_px": truth.internal_damage_px,
        "border_damage_px": truth.border_damage_px,
        "damage_ratio": truth.damage_ratio,
        "hole_sizes": [int(len(r)) for r in truth.hole_regions],
        "bite_sizes": [int(len(r)) for r in truth.bite_regions],
    }


def correlation_payload(result: CorrelationResult) -> dict:
    return {
        "label": result.label,
        "n": result.n,
        "r": _num(result.r),
        "r_percent": _num(result.r * 100.0),
        "p_value": _num(result.p_value),
        "p_display": format_p_value(result.p_value),
        "slope": _num(result.slope),
        "intercept": _num(result.intercept),
        "sd_diff": _num(result.sd_diff),
        "ccc": _num(result.ccc),
    }


def plot_data_payload(series_list, results: list[CorrelationResult]) -> dict:
    """Points, fitted line, and identity line per series, enough for an
    external plotting tool."""
    by_label = {r.label: r for r in results}
    entries = []
    for series in series_list:
        r = by_label.get(series.label)
        lo = float(min(series.manual.min(), series.automatic.min()))
        hi = float(max(series.manual.max(), series.automatic.max()))
        entry = {
            "label": series.label,
            "manual": [float(v) for v in series.manual],
            "automatic": [float(v) for v in series.automatic],
            "identity_line": {"start": [lo, lo], "end": [hi, hi]},
        }
        if r is not None:
            entry["fit_line"] = {
                "start": [lo, _num(r.slope * lo + r.intercept)],
                "end": [hi, _num(r.slope * hi + r.intercept)],
            }
            entry["summary"] = correlation_payload(r)
        entries.append(entry)
    return {"series": entries}


def parse_measurement_series(doc: dict) -> list[MeasurementSeries]:
    check_document(doc, PLOT_DATA)
    out = []
    for entry in doc.get("series", []):
        out.append(
            MeasurementSeries(
                manual=entry["manual"], automatic=entry["automatic"], label=entry.get("label", "series")
            )
        )
    return out
