"""Fuse annotated per-layer cluster maps into one 256x256 label image.

The rule is mask-then-vote:
  1. build a 256x256 text mask as the union, over structural layers, of
     pixels whose cluster is labeled text;
  2. inside the mask, each semantic layer casts one vote per pixel (its
     upsampled cluster class); background votes are discarded;
  3. the pixel class is the majority of the remaining votes, ties broken by
     the vote of the highest-resolution semantic layer, then printed;
  4. masked pixels with no surviving vote fall back to background, and
     everything outside the mask is background.
"""

from __future__ import annotations

import numpy as np

from .catalog import (
    ClusterCatalog,
    ClusterClass,
    LayerCatalog,
    LayerRole,
    validate_catalog,
)
from .docgen import PATCH_SIZE, downsample_label
from .imagecore import BACKGROUND, HANDWRITTEN, NUM_CLASSES, PRINTED, upsample_nearest

_CLASS_TO_ID = {
    ClusterClass.BACKGROUND: BACKGROUND,
    ClusterClass.PRINTED: PRINTED,
    ClusterClass.HANDWRITTEN: HANDWRITTEN,
}


def _class_lut(lc: LayerCatalog, mapping: dict[ClusterClass, int]) -> np.ndarray:
    k = max(lc.clusters, default=-1) + 1
    lut = np.zeros(max(k, 1), dtype=np.uint8)
    for cid, cls in lc.clusters.items():
        lut[cid] = mapping[cls]
    return lut


def fuse_labels(
    assignments: dict[int, np.ndarray],
    catalog: ClusterCatalog,
    models=None,
) -> np.ndarray:
    """Combine per-layer assignment maps into a 256x256 label image."""
    if models is not None:
        problems = validate_catalog(catalog, models)
        if problems:
            raise ValueError("invalid catalog: " + "; ".join(problems))
    structural = [lc for lc in catalog.layers if lc.role == LayerRole.STRUCTURAL and lc.layer_id in assignments]
    semantic = [lc for lc in catalog.layers if lc.role == LayerRole.SEMANTIC and lc.layer_id in assignments]
    if not structural:
        raise ValueError("fusion requires at least one structural layer")
    if not semantic:
        raise ValueError("fusion requires at least one semantic layer")

    mask = np.zeros((PATCH_SIZE, PATCH_SIZE), dtype=bool)
    for lc in structural:
        lut = _class_lut(lc, {ClusterClass.BACKGROUND: 0, ClusterClass.TEXT: 1})
        text = lut[assignments[lc.layer_id]].astype(bool)
        mask |= upsample_nearest(text.astype(np.uint8), PATCH_SIZE).astype(bool)

    # per-pixel votes from semantic layers, highest resolution first
    semantic = sorted(semantic, key=lambda lc: (-lc.size, lc.layer_id))
    votes = np.zeros((NUM_CLASSES, PATCH_SIZE, PATCH_SIZE), dtype=np.int32)
    layer_votes = []
    for lc in semantic:
        lut = _class_lut(lc, _CLASS_TO_ID)
        cls_map = upsample_nearest(lut[assignments[lc.layer_id]], PATCH_SIZE)
        layer_votes.append(cls_map)
        for c in (PRINTED, HANDWRITTEN):
            votes[c] += cls_map == c

    printed_votes = votes[PRINTED]
    hand_votes = votes[HANDWRITTEN]
    label = np.full((PATCH_SIZE, PATCH_SIZE), BACKGROUND, dtype=np.uint8)
    label[printed_votes > hand_votes] = PRINTED
    label[hand_votes > printed_votes] = HANDWRITTEN

    tied = (printed_votes == hand_votes) & (printed_votes > 0)
    if tied.any():
        # highest-resolution semantic layer whose vote is one of the tied
        # classes decides; if none votes text there, printed wins
        resolved = np.zeros_like(tied)
        for cls_map in layer_votes:
            use = tied & ~resolved & (cls_map != BACKGROUND)
            label[use] = cls_map[use]
            resolved |= use
        label[tied & ~resolved] = PRINTED

    label[~mask] = BACKGROUND
    return label


def build_oracle_catalog(
    assignments_per_patch: list[dict[int, np.ndarray]],
    truths: list[np.ndarray],
    layer_sizes: dict[int, int],
) -> ClusterCatalog:
    """Test-only stand-in for the human annotator.

    Labels every cluster with the majority ground-truth class of its member
    pixels (ink-priority downsampled truth for sub-256 layers); layer roles
    follow size: 256 structural, 64/128 semantic, below that ignored.
    """
    if not assignments_per_patch:
        raise ValueError("oracle catalog needs at least one annotated sample")
    if len(assignments_per_patch) != len(truths):
        raise ValueError("assignments and truths must align per patch")

    layers = []
    for layer_id, size in sorted(layer_sizes.items()):
        if size >= PATCH_SIZE:
            role = LayerRole.STRUCTURAL
        elif size >= 64:
            role = LayerRole.SEMANTIC
        else:
            role = LayerRole.IGNORED
        if role == LayerRole.IGNORED:
            layers.append(LayerCatalog(layer_id, size, role))
            continue

        k = max(int(a[layer_id].max()) for a in assignments_per_patch) + 1
        counts = np.zeros((k, NUM_CLASSES), dtype=np.int64)
        for assignment, truth in zip(assignments_per_patch, truths):
            amap = assignment[layer_id]
            t = truth if size == PATCH_SIZE else downsample_label(truth, size)
            np.add.at(counts, (amap.ravel(), t.ravel()), 1)

        clusters = {}
        for cid in range(k):
            if role == LayerRole.STRUCTURAL:
                text = counts[cid, PRINTED] + counts[cid, HANDWRITTEN]
                clusters[cid] = (
                    ClusterClass.TEXT if text > counts[cid, BACKGROUND] else ClusterClass.BACKGROUND
                )
            else:
                winner = int(counts[cid].argmax())
                clusters[cid] = {
                    BACKGROUND: ClusterClass.BACKGROUND,
                    PRINTED: ClusterClass.PRINTED,
                    HANDWRITTEN: ClusterClass.HANDWRITTEN,
                }[winner]
        layers.append(LayerCatalog(layer_id, size, role, clusters))
    return ClusterCatalog(layers)
