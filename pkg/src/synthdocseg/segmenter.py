"""Per-pixel three-class segmenter trained on the synthetic dataset.

Features for a pixel are its w x w grayscale window (reflect-padded),
box-averaged intensities at three pyramid scales and the local intensity
variance, giving d = w^2 + 4 dimensions.  The classifier is a small tanh MLP
(or plain softmax regression when hidden width is 0) trained with mini-batch
gradient descent under a cosine-annealed learning rate and class-balanced
pixel sampling.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .augment import AugmentConfig, augment
from .datasynth import DatasetManifest
from .imagecore import NUM_CLASSES, load_gray_png, load_label_png
from .rng import stream

DEFAULT_WINDOW = 15
PYRAMID_SIZES = (3, 9, 27)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.2
    iterations: int = 20_000
    batch_pixels: int = 8
    batch_patches: int = 16
    seed: int = 0
    hidden_width: int = 32
    window: int = DEFAULT_WINDOW
    patch_refresh: int = 4  # iterations between re-drawing/augmenting patches

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.batch_pixels < 1 or self.batch_patches < 1:
            raise ValueError("batch sizes must be >= 1")


@dataclass
class SegModel:
    window: int
    hidden_width: int
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray | None
    b2: np.ndarray | None
    meta: dict = field(default_factory=dict)

    @property
    def feature_dim(self) -> int:
        return self.window * self.window + 4


def feature_dim(window: int = DEFAULT_WINDOW) -> int:
    return window * window + 4


def cosine_lr(t: int, total: int, lr0: float, lr_min: float = 0.0) -> float:
    return lr_min + 0.5 * (lr0 - lr_min) * (1.0 + np.cos(np.pi * t / total))


# ---------------------------------------------------------------------------
# feature extraction


def _feature_planes(image: np.ndarray, window: int):
    """Precompute the pyramid-mean and variance planes for one image."""
    means = [ndimage.uniform_filter(image, size=s, mode="reflect") for s in PYRAMID_SIZES]
    m1 = ndimage.uniform_filter(image, size=window, mode="reflect")
    m2 = ndimage.uniform_filter(image * image, size=window, mode="reflect")
    var = np.maximum(m2 - m1 * m1, 0.0)
    return means, var


def _precompute_planes(image: np.ndarray, window: int):
    """Window view plus pyramid/variance planes, reusable across many pixels."""
    image = np.asarray(image, dtype=np.float64)
    r = window // 2
    padded = np.pad(image, r, mode="reflect")
    view = np.lib.stride_tricks.sliding_window_view(padded, (window, window))
    means, var = _feature_planes(image, window)
    return view, means, var


def _gather_features(planes, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    view, means, var = planes
    wins = view[ys, xs].reshape(len(ys), -1)
    extra = np.stack([m[ys, xs] for m in means] + [var[ys, xs]], axis=1)
    return np.concatenate([wins, extra], axis=1)


def extract_features_batch(image: np.ndarray, ys: np.ndarray, xs: np.ndarray, window: int = DEFAULT_WINDOW) -> np.ndarray:
    return _gather_features(_precompute_planes(image, window), ys, xs)


def extract_features(image: np.ndarray, x: int, y: int, window: int = DEFAULT_WINDOW) -> np.ndarray:
    """Feature vector for the pixel at column x, row y."""
    h, w = image.shape
    if not (0 <= y < h and 0 <= x < w):
        raise ValueError(f"pixel ({x}, {y}) out of bounds for {h}x{w} image")
    return extract_features_batch(image, np.array([y]), np.array([x]), window)[0]


# ---------------------------------------------------------------------------
# model math


def _forward(model: SegModel, feats: np.ndarray):
    if model.w2 is None:
        logits = feats @ model.w1 + model.b1
        hidden = None
    else:
        pre = feats @ model.w1 + model.b1
        hidden = np.tanh(pre)
        logits = hidden @ model.w2 + model.b2
    logits = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(logits)
    probs = exp / exp.sum(axis=1, keepdims=True)
    return probs, hidden


def _loss_and_grads(model: SegModel, feats: np.ndarray, targets: np.ndarray):
    n = feats.shape[0]
    probs, hidden = _forward(model, feats)
    loss = -np.log(np.maximum(probs[np.arange(n), targets], 1e-300)).mean()
    dlogits = probs.copy()
    dlogits[np.arange(n), targets] -= 1.0
    dlogits /= n
    if model.w2 is None:
        grads = {"w1": feats.T @ dlogits, "b1": dlogits.sum(axis=0)}
    else:
        grads = {"w2": hidden.T @ dlogits, "b2": dlogits.sum(axis=0)}
        dhidden = (dlogits @ model.w2.T) * (1.0 - hidden * hidden)
        grads["w1"] = feats.T @ dhidden
        grads["b1"] = dhidden.sum(axis=0)
    return float(loss), grads


def init_model(config: TrainConfig, meta: dict | None = None) -> SegModel:
    rng = stream(config.seed, "init")
    d = feature_dim(config.window)
    h = config.hidden_width
    if h == 0:
        w1 = rng.normal(0.0, 1.0 / np.sqrt(d), size=(d, NUM_CLASSES))
        return SegModel(config.window, 0, w1, np.zeros(NUM_CLASSES), None, None, meta or {})
    w1 = rng.normal(0.0, 1.0 / np.sqrt(d), size=(d, h))
    w2 = rng.normal(0.0, 1.0 / np.sqrt(h), size=(h, NUM_CLASSES))
    return SegModel(config.window, h, w1, np.zeros(h), w2, np.zeros(NUM_CLASSES), meta or {})


# ---------------------------------------------------------------------------
# training


class _PatchPool:
    """Loaded training patches with per-class pixel indices, refreshed with augmentation."""

    def __init__(self, manifest: DatasetManifest, aug_config: AugmentConfig | None, seed: int):
        self.aug_config = aug_config
        self.seed = seed
        self.images = []
        self.labels = []
        for e in manifest.entries:
            gray = load_gray_png(manifest.root / e.patch)
            self.images.append((gray * 255).astype(np.uint8))
            self.labels.append(load_label_png(manifest.root / e.label))

    def draw(self, rng: np.random.Generator, count: int, round_id: int, window: int):
        out = []
        idx = rng.integers(0, len(self.images), size=count)
        for j, i in enumerate(idx):
            img = self.images[i].astype(np.float64) / 255.0
            lab = self.labels[i]
            if self.aug_config is not None:
                aug_seed = int(stream(self.seed, "aug", round_id, j).integers(0, 2**63))
                img, lab = augment(img, lab, aug_seed, self.aug_config)
            class_idx = [np.flatnonzero(lab.ravel() == c) for c in range(NUM_CLASSES)]
            out.append((lab, class_idx, _precompute_planes(img, window)))
        return out


def _sample_balanced_pixels(patches, per_patch: int, rng: np.random.Generator):
    feats = []
    targets = []
    for lab, class_idx, planes in patches:
        present = [c for c in range(NUM_CLASSES) if len(class_idx[c])]
        flat_ids = np.empty(per_patch, dtype=np.int64)
        cls = np.empty(per_patch, dtype=np.int64)
        for i in range(per_patch):
            c = present[int(rng.integers(0, len(present)))]
            flat_ids[i] = class_idx[c][int(rng.integers(0, len(class_idx[c])))]
            cls[i] = c
        ys, xs = np.divmod(flat_ids, lab.shape[1])
        feats.append(_gather_features(planes, ys, xs))
        targets.append(cls)
    return np.concatenate(feats), np.concatenate(targets)


def train(
    manifest: DatasetManifest,
    config: TrainConfig = TrainConfig(),
    aug_config: AugmentConfig | None = AugmentConfig(),
) -> SegModel:
    if not manifest.entries:
        raise ValueError("training manifest is empty")
    model = init_model(config)
    pool = _PatchPool(manifest, aug_config, config.seed)
    rng = stream(config.seed, "train")
    losses = []
    patches = None
    for t in range(config.iterations):
        if t % config.patch_refresh == 0:
            patches = pool.draw(rng, config.batch_patches, t // config.patch_refresh, config.window)
        feats, targets = _sample_balanced_pixels(patches, config.batch_pixels, rng)
        loss, grads = _loss_and_grads(model, feats, targets)
        if not np.isfinite(loss):
            raise RuntimeError(f"non-finite loss at iteration {t}")
        losses.append(loss)
        lr = cosine_lr(t, config.iterations, config.learning_rate)
        model.w1 -= lr * grads["w1"]
        model.b1 -= lr * grads["b1"]
        if model.w2 is not None:
            model.w2 -= lr * grads["w2"]
            model.b2 -= lr * grads["b2"]
    model.meta = {
        "iterations": config.iterations,
        "learning_rate": config.learning_rate,
        "batch_pixels": config.batch_pixels,
        "batch_patches": config.batch_patches,
        "hidden_width": config.hidden_width,
        "seed": config.seed,
        "final_loss": losses[-1],
        "mean_loss_first_100": float(np.mean(losses[:100])),
        "mean_loss_last_100": float(np.mean(losses[-100:])),
    }
    return model


# ---------------------------------------------------------------------------
# inference


def predict_image(model: SegModel, image: np.ndarray, chunk: int = 16384) -> np.ndarray:
    """Per-pixel softmax probabilities for an arbitrary-size gray image."""
    image = np.asarray(image, dtype=np.float64)
    h, w = image.shape
    ys, xs = np.divmod(np.arange(h * w), w)
    probs = np.empty((h * w, NUM_CLASSES))
    for start in range(0, h * w, chunk):
        sl = slice(start, min(start + chunk, h * w))
        feats = extract_features_batch(image, ys[sl], xs[sl], model.window)
        probs[sl] = _forward(model, feats)[0]
    return probs.reshape(h, w, NUM_CLASSES)


def predict_patch(model: SegModel, image: np.ndarray) -> np.ndarray:
    """Confidence map for one 256x256 grayscale patch."""
    image = np.asarray(image, dtype=np.float64)
    if image.shape != (256, 256):
        raise ValueError(f"predict_patch expects a 256x256 patch, got {image.shape}")
    return predict_image(model, image)


# ---------------------------------------------------------------------------
# persistence: "SEGM" binary weights + JSON sidecar with training metadata

_MAGIC = b"SEGM"
_VERSION = 1


def save_model(model: SegModel, path) -> None:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<HHH", _VERSION, model.window, model.hidden_width))
        arrays = [model.w1, model.b1]
        if model.w2 is not None:
            arrays += [model.w2, model.b2]
        for arr in arrays:
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    path.with_suffix(".json").write_text(json.dumps(model.meta, sort_keys=True))


def load_model(path) -> SegModel:
    path = Path(path)
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError("not a segmenter model file")
        version, window, hidden = struct.unpack("<HHH", fh.read(6))
        if version != _VERSION:
            raise ValueError(f"unsupported model version {version}")
        d = window * window + 4

        def read(shape):
            n = int(np.prod(shape))
            return np.frombuffer(fh.read(4 * n), dtype="<f4").astype(np.float64).reshape(shape)

        if hidden == 0:
            w1 = read((d, NUM_CLASSES))
            b1 = read((NUM_CLASSES,))
            w2 = b2 = None
        else:
            w1 = read((d, hidden))
            b1 = read((hidden,))
            w2 = read((hidden, NUM_CLASSES))
            b2 = read((NUM_CLASSES,))
    sidecar = path.with_suffix(".json")
    meta = json.loads(sidecar.read_text()) if sidecar.exists() else {}
    return SegModel(window, hidden, w1, b1, w2, b2, meta)
