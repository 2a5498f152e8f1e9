import io
import json

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from synthdocseg.catalog import load_catalog
from synthdocseg.cli import main
from synthdocseg.server import create_app


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("run")
    assert main(["--run-dir", str(root), "gen-corpus", "--patches", "4", "--seed", "2"]) == 0
    assert main(["--run-dir", str(root), "fit-clusters", "--k", "5", "--pixel-budget", "2000"]) == 0
    return root


@pytest.fixture()
def client(run_dir):
    return TestClient(create_app(run_dir))


def test_requires_cluster_models(tmp_path):
    with pytest.raises(FileNotFoundError):
        create_app(tmp_path)


def test_layers_listing(client):
    payload = client.get("/api/layers").json()
    assert payload["patch_count"] == 4
    layers = payload["layers"]
    assert [l["layer_id"] for l in layers] == list(range(8))
    assert all(l["k"] == 5 for l in layers)
    by_id = {l["layer_id"]: l for l in layers}
    assert by_id[0]["size"] == 32 and by_id[0]["role"] == "ignored"
    assert by_id[2]["size"] == 64 and by_id[2]["role"] == "semantic"
    assert by_id[7]["size"] == 256 and by_id[7]["role"] == "structural"


def test_cluster_listing_counts(client):
    payload = client.get("/api/layers/2/clusters").json()
    clusters = payload["clusters"]
    assert [c["id"] for c in clusters] == list(range(5))
    # counts cover every pixel of the sampled patches
    assert sum(c["pixel_count"] for c in clusters) == 4 * 64 * 64
    assert client.get("/api/layers/99/clusters").status_code == 404


def test_overlay_and_patch_images(client):
    r = client.get("/api/layers/2/clusters/1/overlay", params={"patch": 0})
    assert r.status_code == 200
    assert r.headers["content-type"] == "image/png"
    img = Image.open(io.BytesIO(r.content))
    assert img.size == (256, 256)

    r = client.get("/api/patches/0")
    assert r.status_code == 200
    assert Image.open(io.BytesIO(r.content)).size == (256, 256)

    assert client.get("/api/patches/99").status_code == 404
    assert client.get("/api/layers/2/clusters/5/overlay").status_code == 404


def test_catalog_roundtrip(client, run_dir):
    assert client.get("/api/catalog").status_code == 404

    def layer(lid, size, role, classes):
        return {
            "layer_id": lid,
            "size": size,
            "role": role,
            "clusters": [{"id": i, "class": c} for i, c in enumerate(classes)],
        }

    struct_classes = ["background", "text", "background", "text", "background"]
    sem_classes = ["background", "printed", "handwritten", "background", "printed"]
    payload = {
        "layers": [
            layer(0, 32, "ignored", []),
            layer(1, 32, "ignored", []),
            layer(2, 64, "semantic", sem_classes),
            layer(3, 64, "ignored", []),
            layer(4, 128, "ignored", []),
            layer(5, 128, "ignored", []),
            layer(6, 256, "structural", struct_classes),
            layer(7, 256, "ignored", []),
        ]
    }
    r = client.post("/api/catalog", json=payload)
    assert r.status_code == 200, r.text

    saved = load_catalog(run_dir / "catalog.json")
    assert saved.layer(2).clusters[1].value == "printed"

    got = json.loads(client.get("/api/catalog").content)
    assert {l["layer_id"] for l in got["layers"]} == set(range(8))

    # saved roles now drive the layer listing
    roles = {l["layer_id"]: l["role"] for l in client.get("/api/layers").json()["layers"]}
    assert roles[3] == "ignored" and roles[6] == "structural"


def test_catalog_validation_rejected(client):
    bad = {
        "layers": [
            {
                "layer_id": 6,
                "size": 256,
                "role": "structural",
                "clusters": [{"id": 0, "class": "handwritten"}],
            }
        ]
    }
    r = client.post("/api/catalog", json=bad)
    assert r.status_code == 422
    problems = r.json()["detail"]["problems"]
    assert any("not allowed" in p for p in problems)

    r = client.post("/api/catalog", json={"nonsense": True})
    assert r.status_code == 422


def test_frontend_served_when_configured(run_dir, tmp_path):
    (tmp_path / "index.html").write_text("<html><body>annotator</body></html>")
    (tmp_path / "app.js").write_text("console.log('ready');")
    client = TestClient(create_app(run_dir, frontend_dir=tmp_path))
    r = client.get("/")
    assert r.status_code == 200 and "annotator" in r.text
    r = client.get("/app.js")
    assert r.status_code == 200 and "ready" in r.text
