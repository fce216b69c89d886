"""End-to-end acceptance checks.

Each test covers one release criterion and prints a single PASS line
with the measured numbers once its assertions hold.  Tolerances are
fixed here on purpose; loosening them is a release decision, not a
test fix.
"""

import json
import time

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

import oracles
from leafbite import analytics, documents, synth
from leafbite.cli import main
from leafbite.geometry import Point2, QuadraticBezier, bezier_point, quadratic_point
from leafbite.imaging import GrayImage, encode_png, save_png
from leafbite.pipeline import AnalysisConfig, analyze_file, analyze_image
from leafbite.segmentation import Histogram, build_histogram, otsu_threshold
from leafbite.service import create_app


def _report(tag, detail):
    print(f"PASS {tag}: {detail}")


# --------------------------------------------------------------------------
# 1. Threshold selection agrees with an exhaustive exact-arithmetic scan.


def _bimodal_counts(rng):
    counts = np.zeros(256, dtype=np.int64)
    c0 = int(rng.integers(10, 110))
    c1 = int(rng.integers(150, 246))
    for center, weight in ((c0, int(rng.integers(200, 2000))), (c1, int(rng.integers(200, 2000)))):
        spread = int(rng.integers(2, 14))
        for offset in range(-spread, spread + 1):
            bin_ = center + offset
            if 0 <= bin_ <= 255:
                counts[bin_] += max(0, weight - abs(offset) * (weight // (spread + 1)))
    return counts


def test_criterion_1_otsu_oracle_equivalence():
    rng = np.random.default_rng(2024)
    started = time.perf_counter()
    cases = 0

    for _ in range(500):
        pixels = rng.integers(0, 256, size=(32, 32), dtype=np.uint8)
        hist = build_histogram(GrayImage(pixels))
        diag = otsu_threshold(hist)
        want_t, want_var = oracles.otsu_scan([int(c) for c in hist.counts])
        assert diag.threshold == want_t
        assert abs(diag.variance_curve[diag.threshold - 1] - float(want_var)) <= 1e-9
        cases += 1

    for _ in range(50):
        hist = Histogram(_bimodal_counts(rng))
        diag = otsu_threshold(hist)
        want_t, want_var = oracles.otsu_scan([int(c) for c in hist.counts])
        assert diag.threshold == want_t
        assert abs(diag.variance_curve[diag.threshold - 1] - float(want_var)) <= 1e-9
        cases += 1

    elapsed = time.perf_counter() - started
    assert elapsed < 5.0, f"threshold suite took {elapsed:.2f}s"
    _report("criterion 1", f"{cases} histograms exact, variance within 1e-9, {elapsed:.2f}s")


# --------------------------------------------------------------------------
# 2. General Bernstein evaluation and the quadratic closed form agree.


def _hull_contains(points, p, eps):
    # convex hull of three points: p is inside iff it is on a consistent
    # side of every edge (signed areas share a sign up to eps)
    a, b, c = points
    signs = []
    for p0, p1 in ((a, b), (b, c), (c, a)):
        signs.append((p1.x - p0.x) * (p.y - p0.y) - (p1.y - p0.y) * (p.x - p0.x))
    return all(s >= -eps for s in signs) or all(s <= eps for s in signs)


def test_criterion_2_bezier_consistency():
    rng = np.random.default_rng(77)
    ts = np.linspace(0.0, 1.0, 100)
    worst = 0.0

    for _ in range(1000):
        pts = rng.uniform(0.0, 100.0, size=(3, 2))
        qb = QuadraticBezier(Point2(*pts[0]), Point2(*pts[1]), Point2(*pts[2]))
        rev = QuadraticBezier(qb.b2, qb.b1, qb.b0)

        area2 = abs(
            (pts[1][0] - pts[0][0]) * (pts[2][1] - pts[0][1])
            - (pts[1][1] - pts[0][1]) * (pts[2][0] - pts[0][0])
        )
        hull_eps = 1e-7 * max(area2, 1.0)

        for t in ts:
            general = bezier_point(qb.control_points, float(t))
            closed = quadratic_point(qb, float(t))
            delta = max(abs(general.x - closed.x), abs(general.y - closed.y))
            worst = max(worst, delta)
            assert delta <= 1e-12

            back = quadratic_point(rev, 1.0 - float(t))
            assert abs(back.x - closed.x) <= 1e-12 and abs(back.y - closed.y) <= 1e-12

            if area2 >= 1.0:
                assert _hull_contains(qb.control_points, closed, hull_eps)

        p0 = quadratic_point(qb, 0.0)
        p2 = quadratic_point(qb, 1.0)
        assert (p0.x, p0.y) == (qb.control_points[0].x, qb.control_points[0].y)
        assert (p2.x, p2.y) == (qb.control_points[2].x, qb.control_points[2].y)

    _report("criterion 2", f"1000 curves x 100 samples, max |general-closed| = {worst:.2e}")


# --------------------------------------------------------------------------
# 3. Internal damage is recovered with zero pixel error on synthetic leaves.


def test_criterion_3_internal_damage_exactness():
    exact = 0
    for seed in range(100):
        spec = synth.random_leaf_spec(seed=seed, max_holes=4, max_speckles=3)
        image, truth = synth.generate_leaf(spec)
        result = analyze_image(image)
        report = result.report
        assert report.internal_damage_px == truth.internal_damage_px, f"seed {seed}"
        assert report.leaf_foreground_px == truth.leaf_foreground_px, f"seed {seed}"
        assert report.damage_ratio == truth.damage_ratio, f"seed {seed}"
        exact += 1
    _report("criterion 3", f"{exact}/100 leaves recovered with 0-pixel error and exact ratio")


# --------------------------------------------------------------------------
# 4. Border reconstruction lands within 8% of the true bite area.


def test_criterion_4_border_reconstruction_accuracy():
    worst = 0.0
    for seed in range(50):
        n_bites = 1 + seed % 2
        spec = synth.random_leaf_spec(seed=1000 + seed, bites=n_bites, max_holes=0, max_speckles=0)
        image, truth = synth.generate_leaf(spec)
        curves = tuple(synth.bite_control_points(spec, i) for i in range(n_bites))
        report = analyze_image(image, curves=curves).report
        recovered = report.border_damage_px + report.internal_damage_px
        rel = abs(recovered - truth.border_damage_px) / truth.border_damage_px
        worst = max(worst, rel)
        assert rel <= 0.08, f"seed {1000 + seed}: {rel:.4f} relative error"
    _report("criterion 4", f"50 bitten leaves reconstructed, worst relative error {worst:.4f}")


# --------------------------------------------------------------------------
# 5. Correlation reporting matches an independent statistics oracle.


def test_criterion_5_correlation_methodology():
    rng = np.random.default_rng(5)
    truths = np.array(
        [synth.generate_leaf(synth.random_leaf_spec(seed=s, width=192, height=192))[1].damage_ratio
         for s in range(200, 218)]
    ) * 100.0
    manual = truths + rng.normal(0.0, 0.02 * truths)
    auto = truths + rng.normal(0.0, 0.02 * truths)

    series = analytics.MeasurementSeries(manual, auto, label="synthetic")
    result = analytics.correlate(series)
    assert result.r >= 0.99
    assert result.p_value < 0.001

    want_r = oracles.pearson_ref(manual.tolist(), auto.tolist())
    want_p = oracles.p_value_ref(want_r, len(manual))
    assert abs(result.r - want_r) <= 1e-9
    assert abs(result.p_value - want_p) <= 1e-9
    _report("criterion 5", f"18 pairs, r = {result.r:.6f}, p = {result.p_value:.3e}, oracle within 1e-9")


# --------------------------------------------------------------------------
# 6. A full-size image clears the interactive latency budget.


def test_criterion_6_throughput(tmp_path):
    warm = synth.random_leaf_spec(seed=42, width=128, height=128)
    warm_path = tmp_path / "warm.png"
    save_png(synth.generate_leaf(warm)[0], warm_path)
    analyze_file(warm_path)  # load LUTs and caches off the clock

    spec = synth.random_leaf_spec(seed=4242, width=1024, height=1024)
    path = tmp_path / "big.png"
    save_png(synth.generate_leaf(spec)[0], path)

    started = time.perf_counter()
    result = analyze_file(path)
    elapsed = time.perf_counter() - started

    assert result.report.total_leaf_px > 0
    assert elapsed < 1.0, f"1024x1024 pipeline took {elapsed * 1000:.0f} ms"
    _report("criterion 6", f"1024x1024 in {elapsed * 1000:.0f} ms (budget 1000 ms, target 250 ms)")


# --------------------------------------------------------------------------
# 7. The CLI and the HTTP service answer with identical documents.


def test_criterion_7_cli_service_equivalence(tmp_path):
    images_dir = tmp_path / "images"
    out_dir = tmp_path / "out"
    images_dir.mkdir()

    curve_map = {}
    paths = []
    for i in range(10):
        spec = synth.random_leaf_spec(seed=3000 + i, width=192, height=192)
        p = images_dir / f"plain_{i:02d}.png"
        save_png(synth.generate_leaf(spec)[0], p)
        paths.append((p, ()))
    for i in range(10):
        spec = synth.random_leaf_spec(
            seed=4000 + i, width=192, height=192, bites=1, max_holes=0, max_speckles=0
        )
        p = images_dir / f"bitten_{i:02d}.png"
        save_png(synth.generate_leaf(spec)[0], p)
        curves = (synth.bite_control_points(spec, 0),)
        curve_map[p.name] = curves
        paths.append((p, curves))

    curves_file = tmp_path / "curves.json"
    curves_file.write_text(
        documents.dumps(
            documents.make_document(documents.CURVES, documents.curves_file_payload(curve_map))
        )
    )

    runner = CliRunner()
    res = runner.invoke(
        main,
        [
            "analyze",
            str(images_dir),
            "--curves",
            str(curves_file),
            "--out",
            str(out_dir),
            "--csv",
            str(tmp_path / "report.csv"),
        ],
    )
    assert res.exit_code == 0, res.output

    client = TestClient(create_app(tmp_path / "store"))
    compared = 0
    for path, curves in paths:
        cli_doc = json.loads((out_dir / f"{path.stem}.result.json").read_text())

        r = client.post(
            "/sessions", content=path.read_bytes(), headers={"content-type": "image/png"}
        )
        assert r.status_code == 201
        sid = r.json()["session"]
        for curve in curves:
            body = {"control_points": [[pt.x, pt.y] for pt in curve.control_points]}
            assert client.post(f"/sessions/{sid}/curves", json=body).status_code == 200
        service_doc = client.get(f"/sessions/{sid}/result").json()
        service_doc.pop("session")
        service_doc.pop("revision")
        assert service_doc == cli_doc, path.name
        compared += 1

    _report("criterion 7", f"{compared}/20 images identical between CLI output and service result")
