"""Cluster catalog: per-layer roles plus cluster-to-class assignments.

This is the data the human annotator produces.  Structural (256x256) layers
only distinguish text location, so their clusters are labeled with the binary
classes background/text; semantic (64/128) layers use the full three-class
set; ignored layers carry no assignments.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .clustering import ClusterModel
from .imagecore import check_rgb, upsample_nearest


class LayerRole(str, Enum):
    STRUCTURAL = "structural"
    SEMANTIC = "semantic"
    IGNORED = "ignored"


class ClusterClass(str, Enum):
    BACKGROUND = "background"
    PRINTED = "printed"
    HANDWRITTEN = "handwritten"
    TEXT = "text"  # structural layers only: text of unknown kind


STRUCTURAL_CLASSES = {ClusterClass.BACKGROUND, ClusterClass.TEXT}
SEMANTIC_CLASSES = {ClusterClass.BACKGROUND, ClusterClass.PRINTED, ClusterClass.HANDWRITTEN}


@dataclass
class LayerCatalog:
    layer_id: int
    size: int
    role: LayerRole
    clusters: dict[int, ClusterClass] = field(default_factory=dict)


@dataclass
class ClusterCatalog:
    layers: list[LayerCatalog] = field(default_factory=list)

    def layer(self, layer_id: int) -> LayerCatalog:
        for lc in self.layers:
            if lc.layer_id == layer_id:
                return lc
        raise KeyError(f"no catalog entry for layer {layer_id}")

    def by_role(self, role: LayerRole) -> list[LayerCatalog]:
        return [lc for lc in self.layers if lc.role == role]


def validate_catalog(catalog: ClusterCatalog, models: dict[int, ClusterModel]) -> list[str]:
    """Return a list of violations; an empty list means the catalog is valid."""
    problems = []
    for lc in catalog.layers:
        if lc.layer_id not in models:
            problems.append(f"layer {lc.layer_id}: no cluster model")
            continue
        model = models[lc.layer_id]
        if lc.role == LayerRole.IGNORED:
            continue
        allowed = STRUCTURAL_CLASSES if lc.role == LayerRole.STRUCTURAL else SEMANTIC_CLASSES
        for cid in range(model.k):
            if cid not in lc.clusters:
                problems.append(f"layer {lc.layer_id}: cluster {cid} has no class assignment")
        for cid, cls in lc.clusters.items():
            if cid < 0 or cid >= model.k:
                problems.append(f"layer {lc.layer_id}: cluster id {cid} out of range for k={model.k}")
            elif cls not in allowed:
                problems.append(
                    f"layer {lc.layer_id}: class '{cls.value}' not allowed for {lc.role.value} layer"
                )
    if not catalog.by_role(LayerRole.STRUCTURAL):
        problems.append("catalog has no structural layer")
    if not catalog.by_role(LayerRole.SEMANTIC):
        problems.append("catalog has no semantic layer")
    return problems


def render_overlay(
    patch: np.ndarray,
    assignment: np.ndarray,
    cluster_id: int,
    k: int | None = None,
    color=(1.0, 0.1, 0.1),
) -> np.ndarray:
    """Tint the pixels of one cluster at 50% opacity over the patch."""
    patch = check_rgb(patch)
    if cluster_id < 0 or (k is not None and cluster_id >= k):
        raise ValueError(f"cluster id {cluster_id} out of range")
    mask = upsample_nearest((assignment == cluster_id).astype(np.uint8), patch.shape[0])
    out = patch.copy()
    sel = mask.astype(bool)
    out[sel] = 0.5 * out[sel] + 0.5 * np.asarray(color, dtype=np.float64)
    return np.clip(out, 0.0, 1.0)


# ---------------------------------------------------------------------------
# canonical JSON serialization (save -> load -> save is byte-identical)


def catalog_to_json(catalog: ClusterCatalog) -> str:
    layers = []
    for lc in sorted(catalog.layers, key=lambda l: l.layer_id):
        layers.append(
            {
                "layer_id": lc.layer_id,
                "size": lc.size,
                "role": lc.role.value,
                "clusters": [
                    {"id": cid, "class": lc.clusters[cid].value}
                    for cid in sorted(lc.clusters)
                ],
            }
        )
    return json.dumps({"layers": layers}, sort_keys=True, separators=(",", ":"))


def catalog_from_json(text: str) -> ClusterCatalog:
    payload = json.loads(text)
    layers = []
    for entry in payload["layers"]:
        layers.append(
            LayerCatalog(
                layer_id=int(entry["layer_id"]),
                size=int(entry["size"]),
                role=LayerRole(entry["role"]),
                clusters={int(c["id"]): ClusterClass(c["class"]) for c in entry["clusters"]},
            )
        )
    return ClusterCatalog(layers)


def save_catalog(catalog: ClusterCatalog, path) -> None:
    with open(path, "w") as fh:
        fh.write(catalog_to_json(catalog))


def load_catalog(path) -> ClusterCatalog:
    with open(path) as fh:
        return catalog_from_json(fh.read())
