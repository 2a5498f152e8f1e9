"""Paired image/label augmentation for segmenter training.

Seven operations: crop (scale then resize back), shear, shift, slight elastic
distortion, rotation, contrast change and color inversion.  Geometric
operations share one sampled transform applied to both the image (bilinear)
and the label (nearest); intensity operations touch the image only.  Pixels
mapped from outside the canvas become background: intensity 1.0, label 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imagecore import check_gray, check_label
from .rng import stream


@dataclass(frozen=True)
class AugmentConfig:
    op_probability: float = 0.5
    rotation_deg: float = 10.0
    shear: float = 0.1
    shift_frac: float = 0.08
    crop_scale_min: float = 0.85
    elastic_grid: int = 4
    elastic_mag: float = 3.0
    contrast_min: float = 0.7
    contrast_max: float = 1.3
    invert_probability: float = 0.2


def _apply_geometric(image, label, matrix, shift, displacement=None):
    """Inverse-map both rasters through one affine (+ optional elastic field)."""
    h, w = image.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    inv = np.linalg.inv(matrix)
    dy = yy - cy - shift[0]
    dx = xx - cx - shift[1]
    src_y = inv[0, 0] * dy + inv[0, 1] * dx + cy
    src_x = inv[1, 0] * dy + inv[1, 1] * dx + cx
    if displacement is not None:
        src_y = src_y + displacement[0]
        src_x = src_x + displacement[1]
    coords = np.stack([src_y, src_x])
    out_img = ndimage.map_coordinates(image, coords, order=1, mode="constant", cval=1.0)
    out_lab = ndimage.map_coordinates(label, coords, order=0, mode="constant", cval=0)
    return np.clip(out_img, 0.0, 1.0), out_lab.astype(np.uint8)


def rotate_pair(image, label, theta_deg):
    """Rotate both rasters about the center (used directly by tests)."""
    t = np.deg2rad(theta_deg)
    m = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
    return _apply_geometric(image, label, m, (0.0, 0.0))


def augment(image, label, seed: int, config: AugmentConfig = AugmentConfig()):
    image = check_gray(image)
    label = check_label(label)
    if image.shape != label.shape:
        raise ValueError(f"image {image.shape} and label {label.shape} dimensions differ")
    h, w = image.shape
    rng = stream(seed, "augment")

    # gates and parameters are always drawn in a fixed order so the transform
    # is a pure function of the seed
    gates = rng.random(7)
    do_crop, do_shear, do_shift, do_elastic, do_rot, do_contrast, do_invert = (
        gates[:6] < config.op_probability
    ).tolist() + [bool(gates[6] < config.invert_probability)]
    crop_scale = rng.uniform(config.crop_scale_min, 1.0)
    shear = rng.uniform(-config.shear, config.shear)
    shift = rng.uniform(-config.shift_frac, config.shift_frac, size=2) * (h, w)
    theta = np.deg2rad(rng.uniform(-config.rotation_deg, config.rotation_deg))
    grid = rng.uniform(-config.elastic_mag, config.elastic_mag, size=(2, config.elastic_grid, config.elastic_grid))
    contrast = rng.uniform(config.contrast_min, config.contrast_max)

    matrix = np.eye(2)
    if do_rot:
        matrix = matrix @ np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    if do_shear:
        matrix = matrix @ np.array([[1.0, shear], [0.0, 1.0]])
    if do_crop:
        matrix = matrix * (1.0 / crop_scale)  # crop then resize back = zoom in
    shift_vec = shift if do_shift else np.zeros(2)

    displacement = None
    if do_elastic:
        zoom = (h / config.elastic_grid, w / config.elastic_grid)
        displacement = np.stack(
            [ndimage.zoom(grid[i], zoom, order=1, mode="nearest", grid_mode=True)[:h, :w] for i in range(2)]
        )

    if do_crop or do_shear or do_shift or do_elastic or do_rot:
        image, label = _apply_geometric(image, label, matrix, shift_vec, displacement)

    if do_contrast:
        image = np.clip(0.5 + contrast * (image - 0.5), 0.0, 1.0)
    if do_invert:
        image = 1.0 - image

    return image, label
