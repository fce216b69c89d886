import json
import math

import numpy as np
import pytest

from leafbite import documents, synth
from leafbite.analytics import CorrelationResult, MeasurementSeries, correlate
from leafbite.errors import DocumentError
from leafbite.geometry import QuadraticBezier
from leafbite.pipeline import AnalysisConfig, analyze_image


def test_envelope_round_trip(tmp_path):
    path = tmp_path / "doc.json"
    documents.write_document(path, documents.RESULT, {"x": 1})
    doc = documents.read_document(path, documents.RESULT)
    assert doc["format"] == "leafbite/result"
    assert doc["version"] == 1
    assert doc["x"] == 1


def test_wrong_kind_rejected(tmp_path):
    path = tmp_path / "doc.json"
    documents.write_document(path, documents.RESULT, {})
    with pytest.raises(DocumentError):
        documents.read_document(path, documents.SESSION)


def test_garbage_json_rejected(tmp_path):
    path = tmp_path / "doc.json"
    path.write_text("{nope")
    with pytest.raises(DocumentError):
        documents.read_document(path, documents.RESULT)


def test_missing_envelope_rejected():
    with pytest.raises(DocumentError):
        documents.check_document({"version": 1}, documents.RESULT)
    with pytest.raises(DocumentError):
        documents.check_document({"format": "leafbite/result", "version": 2}, documents.RESULT)


def test_dumps_has_trailing_newline_and_no_nan():
    text = documents.dumps({"a": 1})
    assert text.endswith("\n")
    with pytest.raises(ValueError):
        documents.dumps({"a": float("nan")})


# ------------------------------------------------------------------ payloads

def test_result_payload_rounds_ratio(plain_leaf):
    spec, image, truth = plain_leaf
    result = analyze_image(image)
    payload = documents.result_payload(result)
    want = round(result.report.damage_ratio, 4)
    assert payload["report"]["damage_ratio"] == want
    assert payload["report"]["internal_damage_px"] == result.report.internal_damage_px
    assert payload["needs_threshold"] is False
    assert payload["config"]["channel"] == "a"
    # document must be JSON-serializable as-is
    json.dumps(payload)


def test_diagnostics_payload_nans_become_null(plain_leaf):
    spec, image, truth = plain_leaf
    result = analyze_image(image)
    payload = documents.result_payload(result)
    curve = payload["diagnostics"]["variance_curve"]
    assert len(curve) == 255
    assert any(v is None for v in curve)  # empty-class candidates
    assert all(v is None or isinstance(v, float) for v in curve)


def test_needs_threshold_payload():
    from leafbite.imaging import RasterImage

    img = RasterImage(np.full((8, 8, 3), 255, np.uint8))
    result = analyze_image(img)
    payload = documents.result_payload(result)
    assert payload["needs_threshold"] is True
    assert payload["report"] is None
    assert payload["diagnostics"] is None


def test_config_parse_merge():
    base = AnalysisConfig()
    cfg = documents.parse_config({"threshold": 50, "min_size": 7}, base=base)
    assert cfg.threshold == 50 and cfg.min_size == 7
    assert cfg.channel == "a"
    # null clears an override
    cleared = documents.parse_config({"threshold": None}, base=cfg)
    assert cleared.threshold is None


def test_config_parse_rejects_unknown_field():
    with pytest.raises(DocumentError):
        documents.parse_config({"thresh": 50})


def test_config_parse_rejects_bad_values():
    with pytest.raises(DocumentError):
        documents.parse_config({"threshold": 0})
    with pytest.raises(DocumentError):
        documents.parse_config({"channel": "z"})
    with pytest.raises(DocumentError):
        documents.parse_config({"threshold": True})


def test_curve_payload_round_trip():
    q = QuadraticBezier((1.5, 2.0), (3.0, 4.0), (5.0, 6.5))
    back = documents.parse_curve(documents.curve_payload(q))
    assert back.control_points == q.control_points


def test_curve_parse_needs_three_points():
    with pytest.raises(DocumentError):
        documents.parse_curve({"control_points": [[0, 0], [1, 1]]})
    with pytest.raises(DocumentError):
        documents.parse_curve({"control_points": [[0, 0], [1, 1], [2, 2], [3, 3]]})
    with pytest.raises(DocumentError):
        documents.parse_curve({"points": []})
    with pytest.raises(DocumentError):
        documents.parse_curve({"control_points": [[0, 0], [1], [2, 2]]})


def test_curves_file_round_trip(tmp_path):
    q = QuadraticBezier((1, 2), (3, 4), (5, 6))
    payload = documents.curves_file_payload({"img.png": [q]})
    path = tmp_path / "curves.json"
    documents.write_document(path, documents.CURVES, payload)
    parsed = documents.parse_curves_file(documents.read_document(path, documents.CURVES))
    assert list(parsed) == ["img.png"]
    assert parsed["img.png"][0].control_points == q.control_points


def test_ground_truth_payload(bite_leaf):
    spec, image, truth = bite_leaf
    payload = documents.ground_truth_payload(truth)
    assert payload["leaf_px_total"] == truth.leaf_px_total
    assert payload["border_damage_px"] == truth.border_damage_px
    assert payload["bite_sizes"] == [r.shape[0] for r in truth.bite_regions]
    json.dumps(payload)


def test_leaf_spec_payload_round_trip(bite_leaf):
    spec, image, truth = bite_leaf
    doc = documents.make_document(documents.LEAF_SPEC, documents.leaf_spec_payload(spec))
    back = documents.parse_leaf_spec(doc)
    assert back == spec


def test_plot_data_payload():
    rng = np.random.default_rng(0)
    m = rng.uniform(1, 10, size=6)
    a = m + rng.normal(0, 0.1, size=6)
    series = MeasurementSeries(manual=m, automatic=a, label="s1")
    results = [correlate(series)]
    payload = documents.plot_data_payload([series], results)
    (entry,) = payload["series"]
    assert entry["label"] == "s1"
    assert len(entry["manual"]) == len(entry["automatic"]) == 6
    assert entry["identity_line"] and entry["fit_line"]
    assert entry["summary"]["n"] == 6
    assert "p_display" in entry["summary"]
    json.dumps(payload)


def test_parse_measurement_series():
    payload = {
        "series": [
            {"label": "s", "manual": [1.0, 2.0, 3.0], "automatic": [1.1, 2.2, 2.9]},
        ]
    }
    doc = documents.make_document(documents.PLOT_DATA, payload)
    series = documents.parse_measurement_series(doc)
    assert len(series) == 1
    assert series[0].n == 3
