import io
import threading

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from leafbite import synth
from leafbite.imaging import RasterImage, encode_png
from leafbite.service import create_app


@pytest.fixture()
def store(tmp_path):
    return tmp_path / "store"


@pytest.fixture()
def client(store):
    return TestClient(create_app(store))


def _upload(client, image, content_type="image/png"):
    r = client.post("/sessions", content=encode_png(image), headers={"content-type": content_type})
    assert r.status_code == 201, r.text
    return r.json()


def _curve_body(curve):
    return {"control_points": [[p.x, p.y] for p in curve.control_points]}


def test_healthz(client):
    r = client.get("/healthz")
    assert r.status_code == 200
    assert r.json() == {"status": "ok"}


# ------------------------------------------------------------------- uploads

def test_upload_matches_cli_analysis(client, plain_leaf, tmp_path):
    spec, image, truth = plain_leaf
    doc = _upload(client, image)
    from leafbite.pipeline import analyze_image
    from leafbite import documents

    want = documents.result_payload(analyze_image(image))
    body = dict(doc)
    body.pop("format"), body.pop("version"), body.pop("session"), body.pop("revision")
    assert body == want


def test_upload_garbage_is_400(client):
    r = client.post("/sessions", content=b"0123456789", headers={"content-type": "image/png"})
    assert r.status_code == 400
    assert "error" in r.json()


def test_upload_wrong_content_type_is_415(client):
    r = client.post("/sessions", content=b"{}", headers={"content-type": "application/json"})
    assert r.status_code == 415


def test_upload_uniform_image_needs_threshold(client):
    img = RasterImage(np.full((32, 32, 3), 255, np.uint8))
    doc = _upload(client, img)
    assert doc["needs_threshold"] is True
    assert doc["report"] is None


def test_upload_tiff(client, plain_leaf):
    spec, image, truth = plain_leaf
    buf = io.BytesIO()
    Image.fromarray(image.pixels, "RGB").save(buf, format="TIFF")
    r = client.post("/sessions", content=buf.getvalue(), headers={"content-type": "image/tiff"})
    assert r.status_code == 201
    assert r.json()["report"]["internal_damage_px"] == truth.internal_damage_px


def test_unknown_session_404(client):
    for url in ("/sessions/nope", "/sessions/nope/result", "/sessions/nope/preview"):
        assert client.get(url).status_code == 404
    assert client.patch("/sessions/nope/config", json={}).status_code == 404
    assert client.delete("/sessions/nope/curves/0").status_code == 404


# -------------------------------------------------------------------- config

def test_patch_auto_threshold_identical_result(client, plain_leaf):
    spec, image, truth = plain_leaf
    doc = _upload(client, image)
    sid = doc["session"]
    auto = doc["diagnostics"]["auto_threshold"]
    r = client.patch(f"/sessions/{sid}/config", json={"threshold": auto})
    assert r.status_code == 200
    doc2 = r.json()
    assert doc2["revision"] == doc["revision"] + 1
    assert doc2["diagnostics"]["overridden"] is True
    assert doc2["report"] == doc["report"]
    assert np.isclose(doc2["report"]["damage_ratio"], doc["report"]["damage_ratio"])


def test_patch_bad_value_400(client, plain_leaf):
    spec, image, truth = plain_leaf
    sid = _upload(client, image)["session"]
    assert client.patch(f"/sessions/{sid}/config", json={"threshold": 0}).status_code == 400
    assert client.patch(f"/sessions/{sid}/config", json={"unknown": 1}).status_code == 400
    assert client.patch(f"/sessions/{sid}/config", content=b"]").status_code == 400


def test_patch_min_size_removes_speckles(client, plain_leaf):
    spec, image, truth = plain_leaf
    assert spec.speckles
    sid = _upload(client, image)["session"]
    # with the floor disabled the speckles count as foreground
    r = client.patch(f"/sessions/{sid}/config", json={"min_size": 0})
    with_speckles = r.json()["report"]["leaf_foreground_px"]
    biggest = max(int(np.pi * d.r * d.r) for d in spec.speckles)
    r = client.patch(f"/sessions/{sid}/config", json={"min_size": biggest + 20})
    without = r.json()["report"]["leaf_foreground_px"]
    assert without == truth.leaf_foreground_px
    assert with_speckles > without


def test_patch_threshold_resolves_needs_threshold(client):
    img = RasterImage(np.full((32, 32, 3), 250, np.uint8))
    doc = _upload(client, img)
    assert doc["needs_threshold"]
    r = client.patch(f"/sessions/{doc['session']}/config", json={"threshold": 128})
    body = r.json()
    assert body["needs_threshold"] is False
    assert body["report"] is not None


# -------------------------------------------------------------------- curves

def test_curve_lifecycle(client, bite_leaf):
    spec, image, truth = bite_leaf
    doc = _upload(client, image)
    sid = doc["session"]
    pre_add = client.get(f"/sessions/{sid}/result").json()

    total = None
    for i in range(len(spec.bites)):
        r = client.post(f"/sessions/{sid}/curves", json=_curve_body(synth.bite_control_points(spec, i)))
        assert r.status_code == 200
        body = r.json()
        assert body["submitted_curve"]["status"] == "accepted"
        total = body["report"]["border_damage_px"]
    assert abs(total - truth.border_damage_px) / truth.border_damage_px <= 0.08

    # duplicate of the last curve is a no-op, list unchanged
    r = client.post(
        f"/sessions/{sid}/curves",
        json=_curve_body(synth.bite_control_points(spec, len(spec.bites) - 1)),
    )
    assert r.json()["submitted_curve"]["status"] == "noop"

    # remove everything; the result content returns to the pre-add state
    n = len(client.get(f"/sessions/{sid}").json()["curves"])
    for _ in range(n):
        r = client.delete(f"/sessions/{sid}/curves/0")
        assert r.status_code == 200
    final = client.get(f"/sessions/{sid}/result").json()
    for key in ("report", "diagnostics", "curves", "config", "needs_threshold"):
        assert final[key] == pre_add[key]


def test_rejected_curve_in_band(client, bite_leaf):
    spec, image, truth = bite_leaf
    doc = _upload(client, image)
    sid = doc["session"]
    r = client.post(f"/sessions/{sid}/curves", json={"control_points": [[1, 1], [2, 1], [3, 1]]})
    assert r.status_code == 200  # rejection is data, not an HTTP error
    body = r.json()
    assert body["submitted_curve"]["status"] == "rejected"
    assert "farther than" in body["submitted_curve"]["reason"]
    assert body["revision"] == doc["revision"]  # not a mutation
    assert body["curves"] == []
    # the rejected curve is not persisted either
    assert client.get(f"/sessions/{sid}").json()["curves"] == []


def test_curve_malformed_400(client, plain_leaf):
    spec, image, truth = plain_leaf
    sid = _upload(client, image)["session"]
    assert (
        client.post(f"/sessions/{sid}/curves", json={"control_points": [[1, 1], [2, 2]]}).status_code
        == 400
    )
    assert client.post(f"/sessions/{sid}/curves", content=b"[").status_code == 400


def test_delete_bad_index_404(client, plain_leaf):
    spec, image, truth = plain_leaf
    sid = _upload(client, image)["session"]
    assert client.delete(f"/sessions/{sid}/curves/0").status_code == 404
    assert client.delete(f"/sessions/{sid}/curves/-1").status_code == 404


def test_curves_blocked_while_needs_threshold(client):
    img = RasterImage(np.full((24, 24, 3), 255, np.uint8))
    sid = _upload(client, img)["session"]
    r = client.post(f"/sessions/{sid}/curves", json={"control_points": [[1, 1], [2, 1], [3, 1]]})
    assert r.status_code == 409


# ------------------------------------------------------------------- results

def test_result_read_is_pure(client, plain_leaf):
    spec, image, truth = plain_leaf
    sid = _upload(client, image)["session"]
    a = client.get(f"/sessions/{sid}/result")
    b = client.get(f"/sessions/{sid}/result")
    assert a.json() == b.json()
    assert a.json()["revision"] == b.json()["revision"]


def test_revision_strictly_increases(client, plain_leaf):
    spec, image, truth = plain_leaf
    sid = _upload(client, image)["session"]
    revs = [client.get(f"/sessions/{sid}/result").json()["revision"]]
    for min_size in (5, 10, 15):
        r = client.patch(f"/sessions/{sid}/config", json={"min_size": min_size})
        revs.append(r.json()["revision"])
    assert revs == sorted(revs) and len(set(revs)) == len(revs)


def test_identical_config_patch_still_bumps_revision(client, plain_leaf):
    spec, image, truth = plain_leaf
    sid = _upload(client, image)["session"]
    r1 = client.patch(f"/sessions/{sid}/config", json={"min_size": 12})
    r2 = client.patch(f"/sessions/{sid}/config", json={"min_size": 12})
    assert r2.json()["revision"] == r1.json()["revision"] + 1


# ------------------------------------------------------------------- preview

def _png_array(data):
    return np.asarray(Image.open(io.BytesIO(data)))


def test_preview_layers(client, plain_leaf):
    spec, image, truth = plain_leaf
    sid = _upload(client, image)["session"]
    r = client.get(f"/sessions/{sid}/preview", params={"layer": "original"})
    assert r.headers["content-type"] == "image/png"
    assert np.array_equal(_png_array(r.content), image.pixels)

    r = client.get(f"/sessions/{sid}/preview", params={"layer": "mask"})
    mask = _png_array(r.content)
    report = client.get(f"/sessions/{sid}/result").json()["report"]
    assert int((mask == 255).sum()) == report["leaf_foreground_px"]

    r = client.get(f"/sessions/{sid}/preview", params={"layer": "annotated"})
    assert r.status_code == 200


def test_preview_unknown_layer_400(client, plain_leaf):
    spec, image, truth = plain_leaf
    sid = _upload(client, image)["session"]
    assert client.get(f"/sessions/{sid}/preview", params={"layer": "depth"}).status_code == 400


def test_preview_without_mask_409(client):
    img = RasterImage(np.full((16, 16, 3), 255, np.uint8))
    sid = _upload(client, img)["session"]
    assert client.get(f"/sessions/{sid}/preview", params={"layer": "original"}).status_code == 200
    assert client.get(f"/sessions/{sid}/preview", params={"layer": "mask"}).status_code == 409
    assert client.get(f"/sessions/{sid}/preview", params={"layer": "annotated"}).status_code == 409


def test_annotated_border_tint_counts(client, bite_leaf):
    spec, image, truth = bite_leaf
    sid = _upload(client, image)["session"]
    for i in range(len(spec.bites)):
        client.post(f"/sessions/{sid}/curves", json=_curve_body(synth.bite_control_points(spec, i)))
    report = client.get(f"/sessions/{sid}/result").json()["report"]
    r = client.get(f"/sessions/{sid}/preview", params={"layer": "annotated"})
    arr = _png_array(r.content)
    from leafbite.imaging import BORDER_DAMAGE_COLOR

    tinted = int(np.all(arr == BORDER_DAMAGE_COLOR, axis=-1).sum())
    assert tinted == report["border_damage_px"]


# --------------------------------------------------------------- persistence

def test_sessions_survive_restart(store, plain_leaf, bite_leaf):
    spec, image, truth = bite_leaf
    client = TestClient(create_app(store))
    sid = _upload(client, image)["session"]
    client.post(f"/sessions/{sid}/curves", json=_curve_body(synth.bite_control_points(spec, 0)))
    client.patch(f"/sessions/{sid}/config", json={"min_size": 11})
    before = client.get(f"/sessions/{sid}/result").json()

    reborn = TestClient(create_app(store))
    after = reborn.get(f"/sessions/{sid}/result").json()
    assert after == before


def test_concurrent_mutations_serialize(client, plain_leaf):
    spec, image, truth = plain_leaf
    sid = _upload(client, image)["session"]
    start = client.get(f"/sessions/{sid}/result").json()["revision"]

    def patch(i):
        client.patch(f"/sessions/{sid}/config", json={"min_size": i + 1})

    threads = [threading.Thread(target=patch, args=(i,)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    end = client.get(f"/sessions/{sid}/result").json()["revision"]
    assert end == start + 8
