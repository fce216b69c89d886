"""Batch command line: analyze images, synthesize test leaves, build
correlation reports, launch the HTTP service.

Exit codes: 0 success (including partial batches with per-row errors),
2 configuration problems, 3 I/O failures.
"""

from __future__ import annotations

import csv
import io
import sys
from pathlib import Path

import click

from . import documents
from .analytics import MeasurementSeries, correlation_report, format_p_value
from .errors import DocumentError, ImageLoadError, LeafbiteError
from .fsio import atomic_write_text
from .imaging import load_image, save_png
from .pipeline import AnalysisConfig, analyze_image, render_result
from .synth import generate_leaf, random_leaf_spec, with_seed

CSV_COLUMNS = [
    "path",
    "leaf_px",
    "internal_px",
    "border_px",
    "total_px",
    "ratio",
    "total_cm2",
    "damage_cm2",
    "threshold",
    "overridden",
    "error",
]

_IMAGE_SUFFIXES = (".png", ".tif", ".tiff")


@click.group()
def main():
    """Leaf damage quantification toolkit."""


def _collect_inputs(inputs: tuple[str, ...]) -> list[Path]:
    paths: list[Path] = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            paths.extend(sorted(q for q in p.iterdir() if q.suffix.lower() in _IMAGE_SUFFIXES))
        else:
            paths.append(p)
    return paths


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def _analyze_row(path: Path, config: AnalysisConfig, curves) -> tuple[dict, object | None, object | None]:
    row = {c: "" for c in CSV_COLUMNS}
    row["path"] = str(path)
    try:
        image = load_image(path)
        result = analyze_image(image, config, tuple(curves))
    except (ImageLoadError, LeafbiteError) as exc:
        row["error"] = str(exc)
        return row, None, None
    if result.needs_threshold:
        row["error"] = "automatic threshold failed: channel is uniform, rerun with --threshold"
        return row, None, None
    rep = result.report
    row.update(
        leaf_px=rep.leaf_foreground_px,
        internal_px=rep.internal_damage_px,
        border_px=rep.border_damage_px,
        total_px=rep.total_leaf_px,
        ratio=_fmt(rep.damage_ratio),
        total_cm2=_fmt(rep.total_cm2),
        damage_cm2=_fmt(rep.damage_cm2),
        threshold=result.diagnostics.threshold,
        overridden=str(result.diagnostics.overridden).lower(),
    )
    return row, image, result


@main.command()
@click.argument("inputs", nargs=-1, type=click.Path())
@click.option("--channel", type=click.Choice(["L", "a", "b"]), default="a", show_default=True)
@click.option("--polarity", type=click.Choice(["below", "above"]), default=None)
@click.option("--threshold", type=click.IntRange(1, 255), default=None, help="Manual threshold override.")
@click.option("--min-size", type=click.IntRange(0), default=None, help="Noise floor in pixels [default: 0.1% of image].")
@click.option("--ppcm", type=float, default=None, help="Pixels per centimeter for area calibration.")
@click.option("--curves", "curves_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Curve document mapping image paths to border-closure curves.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=".", show_default=True)
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None,
              help="Results CSV path [default: <out>/results.csv].")
def analyze(inputs, channel, polarity, threshold, min_size, ppcm, curves_path, out_dir, csv_path):
    """Analyze images; write a CSV plus per-image result document and
    annotated PNG.  Failing images become error rows, not aborts."""
    paths = _collect_inputs(inputs)
    if not paths:
        raise click.UsageError("no input images")
    if ppcm is not None and ppcm <= 0:
        raise click.BadParameter("must be positive", param_hint="--ppcm")

    per_image_curves = {}
    if curves_path is not None:
        try:
            per_image_curves = documents.parse_curves_file(
                documents.read_document(curves_path, documents.CURVES)
            )
        except DocumentError as exc:
            raise click.UsageError(f"--curves: {exc}")

    config = AnalysisConfig(
        channel=channel,
        polarity=polarity,
        threshold=threshold,
        min_size=min_size,
        pixels_per_cm=ppcm,
    )

    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        click.echo(f"cannot create output directory {out}: {exc}", err=True)
        sys.exit(3)
    csv_file = Path(csv_path) if csv_path else out / "results.csv"

    rows = []
    for path in paths:
        # sidecar entries may key by full path or by bare file name
        curves = per_image_curves.get(str(path)) or per_image_curves.get(path.name, ())
        row, image, result = _analyze_row(path, config, curves)
        rows.append(row)
        if result is None:
            continue
        stem = path.stem
        try:
            documents.write_document(
                out / f"{stem}.result.json", documents.RESULT, documents.result_payload(result, curves)
            )
            save_png(render_result(image, result), out / f"{stem}.annotated.png")
        except OSError as exc:
            click.echo(f"cannot write outputs for {path}: {exc}", err=True)
            sys.exit(3)

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS)
    writer.writeheader()
    writer.writerows(rows)
    try:
        atomic_write_text(csv_file, buf.getvalue())
    except OSError as exc:
        click.echo(f"cannot write {csv_file}: {exc}", err=True)
        sys.exit(3)
    failed = sum(1 for r in rows if r["error"])
    click.echo(f"analyzed {len(rows) - failed}/{len(rows)} images -> {csv_file}")


@main.command()
@click.option("--count", type=click.IntRange(0), default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Leaf-spec document to render instead of random leaves.")
@click.option("--holes", type=click.IntRange(0), default=3, show_default=True, help="Max holes per random leaf.")
@click.option("--bites", type=click.IntRange(0, 2), default=0, show_default=True, help="Bites per random leaf.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=".", show_default=True)
def synth(count, seed, spec_path, holes, bites, out_dir):
    """Generate synthetic leaves with exact ground-truth sidecars."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        click.echo(f"cannot create output directory {out}: {exc}", err=True)
        sys.exit(3)

    if spec_path is not None:
        try:
            base = documents.parse_leaf_spec(documents.read_document(spec_path, documents.LEAF_SPEC))
        except DocumentError as exc:
            raise click.UsageError(f"--spec: {exc}")
        specs = [with_seed(base, seed + i) for i in range(count)]
    else:
        specs = [random_leaf_spec(seed + i, max_holes=holes, bites=bites) for i in range(count)]

    for i, spec in enumerate(specs):
        image, truth = generate_leaf(spec)
        stem = f"leaf_{i:04d}"
        try:
            save_png(image, out / f"{stem}.png")
            documents.write_document(out / f"{stem}.truth.json", documents.GROUND_TRUTH,
                                     documents.ground_truth_payload(truth))
            documents.write_document(out / f"{stem}.spec.json", documents.LEAF_SPEC,
                                     documents.leaf_spec_payload(spec))
        except OSError as exc:
            click.echo(f"cannot write {stem}: {exc}", err=True)
            sys.exit(3)
    click.echo(f"generated {len(specs)} leaves in {out}")


@main.command()
@click.argument("pairs_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=".", show_default=True)
def report(pairs_csv, out_dir):
    """Correlate manual/automatic measurement pairs from a CSV with
    columns manual, automatic, and optional label."""
    series = _read_pairs(Path(pairs_csv))
    results, errors = correlation_report(series)
    for label, reason in errors:
        click.echo(f"{label}: {reason}", err=True)
    if not results and errors:
        sys.exit(2)

    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        documents.write_document(out / "correlation.plot.json", documents.PLOT_DATA,
                                 documents.plot_data_payload(series, results))
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["label", "n", "r_percent", "slope", "intercept", "p_value", "sd_diff"])
        for r in results:
            writer.writerow([r.label, r.n, f"{r.r * 100.0:.4f}", repr(r.slope), repr(r.intercept),
                             format_p_value(r.p_value), repr(r.sd_diff)])
        atomic_write_text(out / "correlation.csv", buf.getvalue())
    except OSError as exc:
        click.echo(f"cannot write report: {exc}", err=True)
        sys.exit(3)
    for r in results:
        click.echo(f"{r.label}: n={r.n} r={r.r * 100.0:.2f}% "
                   f"p={format_p_value(r.p_value)} slope={r.slope:.4f}")


def _read_pairs(path: Path) -> list[MeasurementSeries]:
    groups: dict[str, tuple[list, list]] = {}
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"manual", "automatic"} <= set(reader.fieldnames):
                raise click.UsageError(f"{path}: need columns manual, automatic")
            for lineno, row in enumerate(reader, start=2):
                label = row.get("label") or "series"
                try:
                    m = float(row["manual"])
                    a = float(row["automatic"])
                except (TypeError, ValueError):
                    raise click.UsageError(f"{path}: bad number on line {lineno}")
                groups.setdefault(label, ([], []))[0].append(m)
                groups[label][1].append(a)
    except OSError as exc:
        click.echo(f"cannot read {path}: {exc}", err=True)
        sys.exit(3)
    series = []
    for label, (m, a) in groups.items():
        if len(m) < 2:
            raise click.UsageError(f"{path}: series {label!r}: need at least 2 pairs")
        series.append(MeasurementSeries(manual=m, automatic=a, label=label))
    return series


@main.command()
@click.option("--bind", default="127.0.0.1:8000", show_default=True, help="host:port to listen on.")
@click.option("--store", "store_dir", type=click.Path(file_okay=False), default="./sessions",
              show_default=True, help="Session persistence directory.")
def serve(bind, store_dir):
    """Run the HTTP analysis service until interrupted."""
    import uvicorn

    from .service import create_app

    host, _, port_text = bind.rpartition(":")
    if not host or not port_text.isdigit():
        raise click.BadParameter("expected host:port", param_hint="--bind")
    app = create_app(store_dir)
    try:
        uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    except SystemExit as exc:  # uvicorn exits 1 on a bind failure
        if exc.code:
            click.echo(f"cannot serve on {bind}", err=True)
            sys.exit(3)
    except OSError:
        click.echo(f"cannot serve on {bind}", err=True)
        sys.exit(3)


if __name__ == "__main__":
    main()
