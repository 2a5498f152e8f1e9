"""Local HTTP API backing the cluster-annotation UI.

Read-mostly: serves layer/cluster listings, patch images and cluster overlays,
and accepts catalog saves (validated, then persisted with an atomic replace).
Cluster models are never mutated.
"""

from __future__ import annotations

import io
import os
import tempfile
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse, HTMLResponse, Response
from PIL import Image

from . import clustering
from .catalog import LayerRole, catalog_from_json, catalog_to_json, validate_catalog
from .docgen import load_feature_stack
from .imagecore import load_rgb_png
from .catalog import render_overlay

SAMPLE_PATCH_LIMIT = 100
COUNT_PATCH_LIMIT = 10


def default_role(size: int) -> str:
    if size >= 256:
        return LayerRole.STRUCTURAL.value
    if size >= 64:
        return LayerRole.SEMANTIC.value
    return LayerRole.IGNORED.value


class _State:
    def __init__(self, run_dir: Path):
        self.run_dir = run_dir
        self.corpus = run_dir / "corpus"
        self.catalog_path = run_dir / "catalog.json"
        self.models = {}
        clusters_dir = run_dir / "clusters"
        for path in sorted(clusters_dir.glob("layer_*.json")):
            model = clustering.load_model(path)
            self.models[model.layer_id] = model
        self.patch_files = sorted((self.corpus / "patches").glob("*.png"))[:SAMPLE_PATCH_LIMIT]
        self.stack_files = sorted((self.corpus / "stacks").glob("*.fstk"))[:SAMPLE_PATCH_LIMIT]
        self._assign_cache = {}

    def assignment(self, patch_index: int, layer_id: int) -> np.ndarray:
        key = (patch_index, layer_id)
        if key not in self._assign_cache:
            stack = load_feature_stack(self.stack_files[patch_index])
            self._assign_cache[key] = clustering.assign(
                self.models[layer_id], stack.layer(layer_id).values
            )
        return self._assign_cache[key]

    def saved_roles(self) -> dict[int, str]:
        if not self.catalog_path.exists():
            return {}
        with open(self.catalog_path) as fh:
            cat = catalog_from_json(fh.read())
        return {lc.layer_id: lc.role.value for lc in cat.layers}


def create_app(run_dir, frontend_dir=None) -> FastAPI:
    state = _State(Path(run_dir))
    if not state.models:
        raise FileNotFoundError(f"no cluster models under {run_dir}/clusters")
    app = FastAPI(title="synthdocseg annotation server")
    app.state.annotation = state

    sizes = {}
    if state.stack_files:
        stack0 = load_feature_stack(state.stack_files[0])
        sizes = {layer.layer_id: layer.size for layer in stack0.layers}
    layer_sizes = {lid: sizes.get(lid, 256) for lid in state.models}

    @app.get("/api/layers")
    def layers():
        roles = state.saved_roles()
        return {
            "patch_count": len(state.patch_files),
            "layers": [
                {
                    "layer_id": lid,
                    "size": layer_sizes[lid],
                    "k": state.models[lid].k,
                    "role": roles.get(lid, default_role(layer_sizes[lid])),
                }
                for lid in sorted(state.models)
            ],
        }

    @app.get("/api/layers/{layer_id}/clusters")
    def clusters(layer_id: int):
        if layer_id not in state.models:
            raise HTTPException(404, f"unknown layer {layer_id}")
        k = state.models[layer_id].k
        counts = np.zeros(k, dtype=np.int64)
        for i in range(min(COUNT_PATCH_LIMIT, len(state.stack_files))):
            amap = state.assignment(i, layer_id)
            counts += np.bincount(amap.ravel(), minlength=k)
        return {"clusters": [{"id": int(c), "pixel_count": int(counts[c])} for c in range(k)]}

    @app.get("/api/layers/{layer_id}/clusters/{cluster_id}/overlay")
    def overlay(layer_id: int, cluster_id: int, patch: int = 0):
        if layer_id not in state.models:
            raise HTTPException(404, f"unknown layer {layer_id}")
        if not 0 <= patch < len(state.patch_files):
            raise HTTPException(404, f"unknown patch {patch}")
        model = state.models[layer_id]
        if not 0 <= cluster_id < model.k:
            raise HTTPException(404, f"cluster {cluster_id} out of range for k={model.k}")
        rgb = load_rgb_png(state.patch_files[patch])
        amap = state.assignment(patch, layer_id)
        out = render_overlay(rgb, amap, cluster_id, k=model.k)
        buf = io.BytesIO()
        Image.fromarray(np.round(out * 255.0).astype(np.uint8), mode="RGB").save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    @app.get("/api/patches/{patch}")
    def patch_png(patch: int):
        if not 0 <= patch < len(state.patch_files):
            raise HTTPException(404, f"unknown patch {patch}")
        return FileResponse(state.patch_files[patch], media_type="image/png")

    @app.get("/api/catalog")
    def get_catalog():
        if not state.catalog_path.exists():
            raise HTTPException(404, "no catalog saved yet")
        return Response(content=state.catalog_path.read_text(), media_type="application/json")

    @app.post("/api/catalog")
    def post_catalog(payload: dict):
        try:
            cat = catalog_from_json(_dumps(payload))
        except Exception as exc:
            raise HTTPException(422, f"malformed catalog: {exc}")
        problems = validate_catalog(cat, state.models)
        if problems:
            raise HTTPException(422, detail={"problems": problems})
        text = catalog_to_json(cat)
        # atomic replace; concurrent saves are last-write-wins
        fd, tmp = tempfile.mkstemp(dir=state.run_dir, suffix=".catalog.tmp")
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, state.catalog_path)
        return {"status": "ok"}

    if frontend_dir is not None:
        index = Path(frontend_dir) / "index.html"
        bundle = Path(frontend_dir) / "app.js"

        @app.get("/")
        def root():
            return HTMLResponse(index.read_text())

        @app.get("/app.js")
        def app_js():
            return Response(content=bundle.read_text(), media_type="text/javascript")

    return app


def _dumps(payload: dict) -> str:
    import json

    return json.dumps(payload)
