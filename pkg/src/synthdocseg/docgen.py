"""Procedural generator of document patches, ground-truth labels and feature stacks.

This is the controllable stand-in for a trained generative model: it renders
printed glyph rows and handwritten-looking strokes on textured paper, emits the
exact per-pixel label, and builds a multi-resolution feature stack whose layers
mimic the information content of generator activations:

  * 256x256 layers: structural channels derived from the ink mask -- they say
    where text is but not which kind.
  * 64x64 and 128x128 layers: class-separable channels (block-averaged class
    indicators, background damped) plus Gaussian noise of feature_noise_sigma.
  * 32x32 layers: only coarse layout signal, no class information.

Everything is a pure function of (seed, config); per-purpose RNG streams keep
outputs independent of evaluation order.

Ink contrast margin: background intensity is always >= 0.78 while printed ink
is <= 0.22 and handwritten ink <= 0.48, so every labeled pixel differs from
local background by at least 0.30.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .imagecore import (
    BACKGROUND,
    HANDWRITTEN,
    NUM_CLASSES,
    PRINTED,
    box_mean_channels,
)
from .rng import stream

PATCH_SIZE = 256
LAYER_SIZES = (32, 32, 64, 64, 128, 128, 256, 256)
CHANNELS = 8

# damping applied to the background indicator channel; blocks whose ink
# fraction exceeds BG_DAMP / (1 + BG_DAMP) are treated as ink blocks
BG_DAMP = 0.3

GLYPH_SCALE = 3

# 5x7 bitmap font, enough glyph variety for plausible printed rows
_FONT_ROWS = {
    "A": ("01110", "10001", "10001", "11111", "10001", "10001", "10001"),
    "B": ("11110", "10001", "11110", "10001", "10001", "10001", "11110"),
    "C": ("01111", "10000", "10000", "10000", "10000", "10000", "01111"),
    "E": ("11111", "10000", "11110", "10000", "10000", "10000", "11111"),
    "H": ("10001", "10001", "10001", "11111", "10001", "10001", "10001"),
    "K": ("10001", "10010", "10100", "11000", "10100", "10010", "10001"),
    "L": ("10000", "10000", "10000", "10000", "10000", "10000", "11111"),
    "M": ("10001", "11011", "10101", "10101", "10001", "10001", "10001"),
    "N": ("10001", "11001", "10101", "10011", "10001", "10001", "10001"),
    "O": ("01110", "10001", "10001", "10001", "10001", "10001", "01110"),
    "R": ("11110", "10001", "10001", "11110", "10100", "10010", "10001"),
    "S": ("01111", "10000", "01110", "00001", "00001", "00001", "11110"),
    "T": ("11111", "00100", "00100", "00100", "00100", "00100", "00100"),
    "U": ("10001", "10001", "10001", "10001", "10001", "10001", "01110"),
    "W": ("10001", "10001", "10001", "10101", "10101", "11011", "10001"),
    "X": ("10001", "01010", "00100", "00100", "00100", "01010", "10001"),
}
_GLYPHS = [
    np.array([[c == "1" for c in row] for row in rows], dtype=bool)
    for rows in _FONT_ROWS.values()
]


@dataclass(frozen=True)
class GenConfig:
    printed_density: float = 0.5
    handwriting_probability: float = 0.3
    feature_noise_sigma: float = 0.0
    background_texture_level: float = 0.5

    def __post_init__(self):
        for name in ("printed_density", "handwriting_probability", "background_texture_level"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.feature_noise_sigma < 0.0:
            raise ValueError("feature_noise_sigma must be nonnegative")


@dataclass
class FeatureLayer:
    layer_id: int
    size: int
    values: np.ndarray  # (channels, size, size) float32

    @property
    def channels(self) -> int:
        return self.values.shape[0]


@dataclass
class FeatureStack:
    layers: list[FeatureLayer] = field(default_factory=list)

    def layer(self, layer_id: int) -> FeatureLayer:
        return self.layers[layer_id]


# ---------------------------------------------------------------------------
# rendering primitives


def _background(rng: np.random.Generator, h: int, w: int, texture_level: float):
    """Textured paper: a smooth low-frequency field plus fine grain."""
    coarse = rng.standard_normal((max(2, h // 32 + 1), max(2, w // 32 + 1)))
    zy = h / coarse.shape[0]
    zx = w / coarse.shape[1]
    smooth = ndimage.zoom(coarse, (zy, zx), order=1, mode="nearest", grid_mode=True)
    smooth = smooth[:h, :w]
    grain = rng.standard_normal((h, w)) * 0.012
    base = 0.88 + 0.05 * texture_level * smooth + grain
    return np.clip(base, 0.78, 0.98), np.clip(smooth, -2.0, 2.0)


def _stamp_glyph(ink, cls, glyph, y0, x0, intensity):
    gh, gw = glyph.shape
    h, w = ink.shape
    if y0 < 0 or x0 < 0 or y0 + gh > h or x0 + gw > w:
        return
    region = ink[y0 : y0 + gh, x0 : x0 + gw]
    region[glyph] = intensity
    cls[y0 : y0 + gh, x0 : x0 + gw][glyph] = PRINTED


def _render_printed_row(ink, cls, rng, x0, x1, y0):
    """Render one row of scaled bitmap glyphs between x0 and x1."""
    gw = 5 * GLYPH_SCALE
    gh = 7 * GLYPH_SCALE
    x = x0 + int(rng.integers(0, gw))
    while x + gw <= x1:
        word_len = int(rng.integers(2, 7))
        for _ in range(word_len):
            if x + gw > x1:
                break
            glyph = _GLYPHS[int(rng.integers(0, len(_GLYPHS)))]
            big = np.kron(glyph, np.ones((GLYPH_SCALE, GLYPH_SCALE), dtype=bool))
            intensity = 0.10 + 0.08 * rng.random()
            _stamp_glyph(ink, cls, big, y0, x, intensity)
            x += gw + GLYPH_SCALE
        x += gw  # word gap


def _render_stroke(ink, cls, rng, y_range, x_range, thickness=1.4):
    """A smooth handwritten-looking stroke: chained quadratic Bezier segments."""
    h, w = ink.shape
    y_lo, y_hi = y_range
    x_lo, x_hi = x_range
    p = np.array([rng.uniform(y_lo, y_hi), rng.uniform(x_lo, x_hi)])
    intensity = 0.30 + 0.12 * rng.random()
    n_seg = int(rng.integers(2, 5))
    pts = []
    for _ in range(n_seg):
        ctrl = p + rng.uniform(-35, 35, size=2)
        end = p + rng.uniform(-45, 45, size=2)
        end[0] = np.clip(end[0], y_lo, y_hi)
        end[1] = np.clip(end[1], x_lo, x_hi)
        t = np.linspace(0.0, 1.0, 80)[:, None]
        curve = (1 - t) ** 2 * p + 2 * (1 - t) * t * ctrl + t**2 * end
        pts.append(curve)
        p = end
    curve = np.concatenate(pts, axis=0)
    r = int(np.ceil(thickness))
    offs = [
        (dy, dx)
        for dy in range(-r, r + 1)
        for dx in range(-r, r + 1)
        if dy * dy + dx * dx <= thickness * thickness
    ]
    ys = np.round(curve[:, 0]).astype(int)
    xs = np.round(curve[:, 1]).astype(int)
    for dy, dx in offs:
        yy = np.clip(ys + dy, 0, h - 1)
        xx = np.clip(xs + dx, 0, w - 1)
        ink[yy, xx] = intensity
        cls[yy, xx] = HANDWRITTEN


def _to_rgb(gray: np.ndarray) -> np.ndarray:
    rgb = np.stack([gray, gray * 0.985, gray * 0.955], axis=2)
    return np.clip(rgb, 0.0, 1.0)


# ---------------------------------------------------------------------------
# patch generation


def _render_patch_canvas(seed: int, config: GenConfig):
    bg_rng = stream(seed, "patch", "bg")
    ink, texture = _background(bg_rng, PATCH_SIZE, PATCH_SIZE, config.background_texture_level)
    cls = np.zeros((PATCH_SIZE, PATCH_SIZE), dtype=np.uint8)

    layout_rng = stream(seed, "patch", "layout")
    printed_rng = stream(seed, "patch", "printed")
    hand_rng = stream(seed, "patch", "hand")

    if layout_rng.random() < config.printed_density:
        pitch = 7 * GLYPH_SCALE + 8
        margin = 12
        max_rows = (PATCH_SIZE - 2 * margin) // pitch
        n_rows = int(printed_rng.integers(1, max_rows + 1))
        y_start = margin + int(printed_rng.integers(0, pitch))
        for i in range(n_rows):
            y0 = y_start + i * pitch
            if y0 + 7 * GLYPH_SCALE > PATCH_SIZE - margin:
                break
            _render_printed_row(ink, cls, printed_rng, margin, PATCH_SIZE - margin, y0)

    if layout_rng.random() < config.handwriting_probability:
        n_strokes = int(hand_rng.integers(1, 4))
        for _ in range(n_strokes):
            _render_stroke(ink, cls, hand_rng, (10, PATCH_SIZE - 10), (10, PATCH_SIZE - 10))

    return ink, cls, texture


def downsample_label(label: np.ndarray, size: int) -> np.ndarray:
    """Ink-priority label downsample used for all sub-resolution ground truth.

    Each block is assigned argmax(BG_DAMP * bg_fraction, printed_fraction,
    handwritten_fraction), so blocks with a modest ink fraction count as ink;
    ties between the ink classes resolve to printed.
    """
    onehot = _label_onehot(label)
    frac = box_mean_channels(onehot, size)
    frac[BACKGROUND] *= BG_DAMP
    return frac.argmax(axis=0).astype(np.uint8)


def _label_onehot(label: np.ndarray) -> np.ndarray:
    oh = np.zeros((NUM_CLASSES,) + label.shape, dtype=np.float64)
    for c in range(NUM_CLASSES):
        oh[c] = label == c
    return oh


def _ramps(size: int):
    ramp = np.linspace(0.0, 1.0, size)
    return np.tile(ramp, (size, 1)), np.tile(ramp[:, None], (1, size))


def _build_feature_stack(seed: int, config: GenConfig, ink, cls, texture) -> FeatureStack:
    onehot = _label_onehot(cls)
    ink_mask = (cls != BACKGROUND).astype(np.float64)
    inkness = 1.0 - ink
    sigma = config.feature_noise_sigma

    layers = []
    for layer_id, size in enumerate(LAYER_SIZES):
        ramp_x, ramp_y = _ramps(size)
        const = np.full((size, size), 0.1)
        ch = np.zeros((CHANNELS, size, size), dtype=np.float64)
        if size == PATCH_SIZE:
            # structural: text location without class
            ch[0] = ink_mask
            ch[1] = 1.0 - ink_mask
            ch[2] = 0.3 * inkness
            ch[3] = 0.3 * (texture * 0.25 + 0.5)
            ch[4] = 0.12 * ramp_x
            ch[5] = 0.12 * ramp_y
            ch[6] = const
        elif size in (64, 128):
            # semantic: block class fractions with damped background
            frac = box_mean_channels(onehot, size)
            ch[0] = BG_DAMP * frac[BACKGROUND]
            ch[1] = frac[PRINTED]
            ch[2] = frac[HANDWRITTEN]
            ch[3] = 0.25 * box_mean_channels(inkness[None], size)[0]
            ch[4] = 0.25 * box_mean_channels(ink[None], size)[0]
            ch[5] = 0.12 * ramp_x
            ch[6] = 0.12 * ramp_y
            ch[7] = const
        else:
            # coarse layout only: where ink roughly is, heavily smoothed
            cover = box_mean_channels(ink_mask[None], size)[0]
            cover = ndimage.uniform_filter(cover, size=3, mode="nearest")
            ch[0] = cover
            ch[1] = 1.0 - cover
            ch[2] = 0.3 * box_mean_channels((texture * 0.25 + 0.5)[None], size)[0]
            ch[3] = 0.12 * ramp_x
            ch[4] = 0.12 * ramp_y
            ch[5] = const
        if sigma > 0.0:
            noise_rng = stream(seed, "patch", "feat", layer_id)
            ch = ch + noise_rng.normal(0.0, sigma, size=ch.shape)
        layers.append(FeatureLayer(layer_id, size, ch.astype(np.float32)))
    return FeatureStack(layers)


def generate_patch(seed: int, config: GenConfig):
    """Render one 256x256 patch: (rgb image, label image, feature stack)."""
    ink, cls, texture = _render_patch_canvas(seed, config)
    stack = _build_feature_stack(seed, config, ink, cls, texture)
    return _to_rgb(ink), cls, stack


# ---------------------------------------------------------------------------
# full documents


def generate_document(seed: int, config: GenConfig, height: int, width: int):
    """Render a multi-region page with exact ground truth (no feature stack)."""
    if height < PATCH_SIZE or width < PATCH_SIZE:
        raise ValueError(f"document dimensions must be >= {PATCH_SIZE}, got {height}x{width}")
    bg_rng = stream(seed, "doc", "bg")
    ink, _ = _background(bg_rng, height, width, config.background_texture_level)
    cls = np.zeros((height, width), dtype=np.uint8)

    layout_rng = stream(seed, "doc", "layout")
    printed_rng = stream(seed, "doc", "printed")
    hand_rng = stream(seed, "doc", "hand")

    margin = max(16, height // 16)
    note_w = max(48, width // 6)
    text_x1 = width - margin - note_w
    pitch = 7 * GLYPH_SCALE + 10

    # printed paragraphs in the main column
    y = margin
    while y + 7 * GLYPH_SCALE < height - margin:
        if layout_rng.random() < max(config.printed_density, 0.05):
            _render_printed_row(ink, cls, printed_rng, margin, text_x1, y)
        y += pitch
        if layout_rng.random() < 0.15:
            y += pitch  # paragraph break

    # handwritten margin notes
    if layout_rng.random() < config.handwriting_probability:
        n_notes = int(hand_rng.integers(1, 4))
        for _ in range(n_notes):
            y0 = hand_rng.uniform(margin, height - margin - 60)
            _render_stroke(
                ink, cls, hand_rng,
                (y0, min(y0 + 80, height - 10)),
                (text_x1 + 8, width - 10),
            )

    return _to_rgb(ink), cls


# ---------------------------------------------------------------------------
# feature stack binary format: magic "FSTK", version u16, layer count u16;
# per layer: size u16, channels u16, then C*size*size float32 little-endian,
# channel-major then row-major.

_MAGIC = b"FSTK"
_VERSION = 1


def save_feature_stack(stack: FeatureStack, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<HH", _VERSION, len(stack.layers)))
        for layer in stack.layers:
            fh.write(struct.pack("<HH", layer.size, layer.channels))
            fh.write(np.ascontiguousarray(layer.values, dtype="<f4").tobytes())


def load_feature_stack(path) -> FeatureStack:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValueError(f"not a feature-stack file: bad magic {magic!r}")
        version, count = struct.unpack("<HH", fh.read(4))
        if version != _VERSION:
            raise ValueError(f"unsupported feature-stack version {version}")
        layers = []
        for layer_id in range(count):
            size, channels = struct.unpack("<HH", fh.read(4))
            n = channels * size * size
            data = np.frombuffer(fh.read(4 * n), dtype="<f4").reshape(channels, size, size)
            layers.append(FeatureLayer(layer_id, size, data.copy()))
    return FeatureStack(layers)
