"""Core raster types and conversions shared by the whole pipeline.

Conventions (bit-exact contract for golden tests):
  * gray raster:      float64 array (H, W), values in [0, 1], row-major, y-down
  * rgb raster:       float64 array (H, W, 3), values in [0, 1]
  * label image:      uint8 array (H, W), values in {0 background, 1 printed, 2 handwritten}
  * confidence map:   float64 array (H, W, 3), per-pixel class probabilities summing to 1

All operations are pure; nothing here keeps state.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

BACKGROUND = 0
PRINTED = 1
HANDWRITTEN = 2
NUM_CLASSES = 3

# visualization palette: black background, orange printed, blue handwritten
CLASS_COLORS = np.array(
    [
        [0, 0, 0],
        [255, 140, 0],
        [30, 90, 255],
    ],
    dtype=np.uint8,
)

# BT.601 luma weights
_LUMA = np.array([0.299, 0.587, 0.114])


def check_gray(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"gray raster must be 2-D, got shape {img.shape}")
    if img.size and (img.min() < 0.0 or img.max() > 1.0):
        raise ValueError("gray raster values must lie in [0, 1]")
    return img


def check_rgb(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"rgb raster must have shape (H, W, 3), got {img.shape}")
    if img.size and (img.min() < 0.0 or img.max() > 1.0):
        raise ValueError("rgb raster values must lie in [0, 1]")
    return img


def check_label(label: np.ndarray) -> np.ndarray:
    label = np.asarray(label)
    if label.ndim != 2:
        raise ValueError(f"label image must be 2-D, got shape {label.shape}")
    if label.size and not np.isin(label, (BACKGROUND, PRINTED, HANDWRITTEN)).all():
        raise ValueError("label image values must be in {0, 1, 2}")
    return label.astype(np.uint8)


def check_confidence(conf: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    conf = np.asarray(conf, dtype=np.float64)
    if conf.ndim != 3 or conf.shape[2] != NUM_CLASSES:
        raise ValueError(f"confidence map must have shape (H, W, 3), got {conf.shape}")
    if conf.size:
        if conf.min() < 0.0:
            raise ValueError("confidence values must be nonnegative")
        if np.abs(conf.sum(axis=2) - 1.0).max() > tol:
            raise ValueError("per-pixel class probabilities must sum to 1")
    return conf


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """Convert an rgb raster to gray using BT.601 luma weights."""
    img = check_rgb(img)
    gray = img @ _LUMA
    return np.clip(gray, 0.0, 1.0)


def upsample_nearest(img: np.ndarray, target_size: int) -> np.ndarray:
    """Nearest-neighbor upsample of a square map by an integer factor.

    Works on label images and cluster-assignment maps alike; the value set is
    never changed (each source cell is replicated into a block).
    """
    img = np.asarray(img)
    src = img.shape[0]
    if img.ndim != 2 or img.shape[1] != src:
        raise ValueError("upsample_nearest expects a square 2-D map")
    if target_size % src != 0:
        raise ValueError(f"target size {target_size} is not a multiple of source size {src}")
    factor = target_size // src
    return np.repeat(np.repeat(img, factor, axis=0), factor, axis=1)


def downsample_box(img: np.ndarray, target_size: int) -> np.ndarray:
    """Box-filter downsample of a square gray raster by an integer factor."""
    img = check_gray(img)
    src = img.shape[0]
    if img.shape[1] != src:
        raise ValueError("downsample_box expects a square raster")
    if src % target_size != 0:
        raise ValueError(f"source size {src} is not a multiple of target size {target_size}")
    factor = src // target_size
    return img.reshape(target_size, factor, target_size, factor).mean(axis=(1, 3))


def box_mean_channels(channels: np.ndarray, target_size: int) -> np.ndarray:
    """Block-mean each channel of a (C, S, S) stack down to (C, target, target)."""
    channels = np.asarray(channels, dtype=np.float64)
    c, src, src2 = channels.shape
    if src != src2 or src % target_size != 0:
        raise ValueError("channels must be square with an integer downsample factor")
    f = src // target_size
    return channels.reshape(c, target_size, f, target_size, f).mean(axis=(2, 4))


# ---------------------------------------------------------------------------
# PNG persistence


def save_gray_png(img: np.ndarray, path) -> None:
    img = check_gray(img)
    Image.fromarray(np.round(img * 255.0).astype(np.uint8), mode="L").save(path)


def load_gray_png(path) -> np.ndarray:
    arr = np.asarray(Image.open(path).convert("L"), dtype=np.float64)
    return arr / 255.0


def save_rgb_png(img: np.ndarray, path) -> None:
    img = check_rgb(img)
    Image.fromarray(np.round(img * 255.0).astype(np.uint8), mode="RGB").save(path)


def load_rgb_png(path) -> np.ndarray:
    arr = np.asarray(Image.open(path).convert("RGB"), dtype=np.float64)
    return arr / 255.0


def save_label_png(label: np.ndarray, path) -> None:
    label = check_label(label)
    Image.fromarray(label, mode="L").save(path)


def load_label_png(path) -> np.ndarray:
    arr = np.asarray(Image.open(path).convert("L"))
    return check_label(arr)


def label_to_color(label: np.ndarray) -> np.ndarray:
    """Render a label image as an rgb raster using the class palette."""
    label = check_label(label)
    return CLASS_COLORS[label].astype(np.float64) / 255.0


def save_label_viz_png(label: np.ndarray, path) -> None:
    save_rgb_png(label_to_color(label), path)
