"""Full-document segmentation: tile, predict, reassemble, post-process."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imagecore import (
    BACKGROUND,
    HANDWRITTEN,
    PRINTED,
    check_confidence,
    check_gray,
    to_grayscale,
)
from .segmenter import SegModel, predict_patch

PATCH_SIZE = 256

# 8-connectivity for text components
_STRUCTURE = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class PostprocessParams:
    overlap_factor: float = 0.0
    min_confidence: float = 0.7
    min_contour_area: int = 50


def _offsets(length: int, patch: int, stride: int) -> list[int]:
    offs = list(range(0, length - patch + 1, stride))
    flush = length - patch
    if offs[-1] != flush:
        offs.append(flush)
    return offs


def tile(document: np.ndarray, patch_size: int = PATCH_SIZE, overlap_factor: float = 0.0):
    """Cut a gray document into covering patches.

    Returns (patches, padded_shape) where patches is a list of
    (patch, x_offset, y_offset); the document is reflect-padded only when it
    is smaller than the patch size, and offsets refer to the padded raster.
    """
    document = check_gray(document)
    if not 0.0 <= overlap_factor < 1.0:
        raise ValueError(f"overlap factor must be in [0, 1), got {overlap_factor}")
    h, w = document.shape
    pad_h = max(patch_size - h, 0)
    pad_w = max(patch_size - w, 0)
    if pad_h or pad_w:
        document = np.pad(document, ((0, pad_h), (0, pad_w)), mode="reflect")
        h, w = document.shape
    stride = max(int(round(patch_size * (1.0 - overlap_factor))), 1)
    patches = []
    for y in _offsets(h, patch_size, stride):
        for x in _offsets(w, patch_size, stride):
            patches.append((document[y : y + patch_size, x : x + patch_size], x, y))
    return patches, (h, w)


def reassemble(predictions, doc_height: int, doc_width: int) -> np.ndarray:
    """Merge overlapping patch confidence maps into one document map.

    Each pixel takes the full probability vector of the covering patch whose
    maximum class probability is largest; ties go to the earliest patch in
    scan order.
    """
    out = np.zeros((doc_height, doc_width, 3))
    best = np.full((doc_height, doc_width), -1.0)
    for conf, x, y in predictions:
        conf = check_confidence(conf)
        ph, pw = conf.shape[:2]
        if y < 0 or x < 0 or y + ph > doc_height or x + pw > doc_width:
            raise ValueError(f"patch at ({x}, {y}) falls outside the document")
        peak = conf.max(axis=2)
        region = best[y : y + ph, x : x + pw]
        better = peak > region
        region[better] = peak[better]
        out[y : y + ph, x : x + pw][better] = conf[better]
    uncovered = np.argwhere(best < 0.0)
    if len(uncovered):
        y, x = uncovered[0]
        raise ValueError(f"pixel ({x}, {y}) is not covered by any patch")
    return out


def postprocess(conf: np.ndarray, min_confidence: float, min_contour_area: int) -> np.ndarray:
    """Argmax, confidence-threshold text pixels, drop small text components.

    Components are 8-connected and filtered per text class; a component is
    discarded when its area is strictly less than min_contour_area.
    """
    conf = check_confidence(conf)
    if not 0.0 <= min_confidence <= 1.0:
        raise ValueError("min_confidence must be in [0, 1]")
    if min_contour_area < 0:
        raise ValueError("min_contour_area must be nonnegative")
    label = conf.argmax(axis=2).astype(np.uint8)
    winning = conf.max(axis=2)
    text = label != BACKGROUND
    label[text & (winning < min_confidence)] = BACKGROUND
    for cls in (PRINTED, HANDWRITTEN):
        mask = label == cls
        comps, n = ndimage.label(mask, structure=_STRUCTURE)
        if n == 0:
            continue
        areas = np.bincount(comps.ravel(), minlength=n + 1)
        small = areas < min_contour_area
        small[0] = False
        label[small[comps]] = BACKGROUND
    return label


def segment_document(model: SegModel, document: np.ndarray, params: PostprocessParams) -> np.ndarray:
    """Grayscale -> tile -> predict -> reassemble -> postprocess."""
    if document.ndim == 3:
        gray = to_grayscale(document)
    else:
        gray = check_gray(document)
    orig_h, orig_w = gray.shape
    patches, (h, w) = tile(gray, PATCH_SIZE, params.overlap_factor)
    predictions = [(predict_patch(model, p), x, y) for p, x, y in patches]
    conf = reassemble(predictions, h, w)[:orig_h, :orig_w]
    return postprocess(conf, params.min_confidence, params.min_contour_area)


def predict_document(model: SegModel, document: np.ndarray, overlap_factor: float) -> np.ndarray:
    """Reassembled confidence map for a document, before post-processing."""
    if document.ndim == 3:
        gray = to_grayscale(document)
    else:
        gray = check_gray(document)
    orig_h, orig_w = gray.shape
    patches, (h, w) = tile(gray, PATCH_SIZE, overlap_factor)
    predictions = [(predict_patch(model, p), x, y) for p, x, y in patches]
    return reassemble(predictions, h, w)[:orig_h, :orig_w]
