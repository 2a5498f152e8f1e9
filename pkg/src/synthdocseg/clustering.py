"""Spherical k-means over per-pixel feature vectors of generator layers.

Centroids live on the unit sphere and the objective is the summed cosine
similarity of every sample to its centroid.  One model is fit per layer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .docgen import FeatureStack
from .rng import stream

DEFAULT_K = 20
DEFAULT_MAX_ITER = 100
DEFAULT_TOL = 1e-4
DEFAULT_PIXEL_BUDGET = 200_000
MAX_STACKS = 100

_EPS = 1e-12


@dataclass
class ClusterModel:
    layer_id: int
    k: int
    centroids: np.ndarray  # (k, C) unit rows
    iterations: int = 0
    objective: float = 0.0
    objective_history: list[float] = field(default_factory=list)


def _normalize_rows(x: np.ndarray) -> np.ndarray:
    """Unit-normalize rows; all-zero rows go to the canonical first axis."""
    x = np.asarray(x, dtype=np.float64)
    norms = np.linalg.norm(x, axis=1)
    zero = norms < _EPS
    out = x / np.maximum(norms, _EPS)[:, None]
    if zero.any():
        out[zero] = 0.0
        out[zero, 0] = 1.0
    return out


def _kmeanspp_init(xn: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding with cosine distance d = 1 - cos."""
    n = xn.shape[0]
    centers = np.empty((k, xn.shape[1]))
    idx = int(rng.integers(0, n))
    centers[0] = xn[idx]
    d = 1.0 - xn @ centers[0]
    for j in range(1, k):
        w = np.maximum(d, 0.0)
        total = w.sum()
        if total <= _EPS:
            idx = int(rng.integers(0, n))
        else:
            idx = int(rng.choice(n, p=w / total))
        centers[j] = xn[idx]
        d = np.minimum(d, 1.0 - xn @ centers[j])
    return centers


def _hartigan_refine(xn: np.ndarray, assign_ids: np.ndarray, k: int, max_sweeps: int = 20):
    """Single-point improvement pass escaping Lloyd local optima.

    With optimal centroids the cosine objective equals sum_j ||S_j|| where
    S_j is the vector sum of cluster j's members, so the gain of moving one
    point is evaluated exactly in O(C) from cached sums.
    """
    n = len(xn)
    sums = np.zeros((k, xn.shape[1]))
    np.add.at(sums, assign_ids, xn)
    counts = np.bincount(assign_ids, minlength=k)
    norms = np.linalg.norm(sums, axis=1)
    for _ in range(max_sweeps):
        # provisional gains for every point against the current sums; only
        # points that look improving are re-checked exactly and moved
        dots_all = xn @ sums.T
        own = dots_all[np.arange(n), assign_ids]
        norm_out = np.sqrt(np.maximum(norms[assign_ids] ** 2 - 2.0 * own + 1.0, 0.0))
        gain_in = np.sqrt(norms[None, :] ** 2 + 2.0 * dots_all + 1.0) - norms[None, :]
        gain_in[np.arange(n), assign_ids] = -np.inf
        provisional = gain_in.max(axis=1) + (norm_out - norms[assign_ids])
        candidates = np.flatnonzero(provisional > 1e-12)

        improved = False
        for i in candidates:
            a = assign_ids[i]
            if counts[a] <= 1:
                continue
            x = xn[i]
            dots = sums @ x
            out = np.sqrt(max(norms[a] ** 2 - 2.0 * dots[a] + 1.0, 0.0))
            gains = np.sqrt(norms**2 + 2.0 * dots + 1.0) - norms - (norms[a] - out)
            gains[a] = 0.0
            b = int(gains.argmax())
            if gains[b] > 1e-12:
                sums[a] -= x
                sums[b] += x
                norms[a] = out
                norms[b] = np.sqrt(max(norms[b] ** 2 + 2.0 * dots[b] + 1.0, 0.0))
                counts[a] -= 1
                counts[b] += 1
                assign_ids[i] = b
                improved = True
        if not improved:
            break
    return assign_ids


def _fit_once(xn: np.ndarray, k: int, rng, max_iter: int, tol: float):
    centroids = _kmeanspp_init(xn, k, rng)
    history = []
    assign_ids = None
    for it in range(max_iter):
        sims = xn @ centroids.T
        assign_ids = sims.argmax(axis=1)
        history.append(float(sims[np.arange(len(xn)), assign_ids].sum()))

        new_centroids = centroids.copy()
        counts = np.bincount(assign_ids, minlength=k)
        sums = np.zeros_like(centroids)
        np.add.at(sums, assign_ids, xn)
        nonempty = counts > 0
        new_centroids[nonempty] = _normalize_rows(sums[nonempty])
        if (~nonempty).any():
            # reseed empty clusters from the samples farthest from their centroid
            own = sims[np.arange(len(xn)), assign_ids]
            order = np.argsort(own)  # ascending similarity = descending distance
            for j, cid in enumerate(np.flatnonzero(~nonempty)):
                new_centroids[cid] = xn[order[j % len(order)]]

        movement = float(np.linalg.norm(new_centroids - centroids, axis=1).max())
        centroids = new_centroids
        if movement < tol:
            break

    assign_ids = _hartigan_refine(xn, assign_ids, k)
    sums = np.zeros_like(centroids)
    np.add.at(sums, assign_ids, xn)
    counts = np.bincount(assign_ids, minlength=k)
    nonempty = counts > 0
    centroids[nonempty] = _normalize_rows(sums[nonempty])
    sims = xn @ centroids.T
    final = float(sims[np.arange(len(xn)), sims.argmax(axis=1)].sum())
    if final > history[-1]:
        history.append(final)
    return centroids, history


def fit_spherical_kmeans(
    samples: np.ndarray,
    k: int = DEFAULT_K,
    seed: int = 0,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    n_restarts: int = 1,
    layer_id: int = 0,
) -> ClusterModel:
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[1] < 1:
        raise ValueError("samples must be a (n, C) array with C >= 1")
    if samples.shape[0] < k:
        raise ValueError(f"need at least k={k} samples, got {samples.shape[0]}")
    if k < 1:
        raise ValueError("k must be >= 1")

    xn = _normalize_rows(samples)
    best = None
    for restart in range(n_restarts):
        rng = stream(seed, "spkmeans", layer_id, restart)
        centroids, history = _fit_once(xn, k, rng, max_iter, tol)
        if best is None or history[-1] > best[1][-1]:
            best = (centroids, history)
    centroids, history = best
    return ClusterModel(
        layer_id=layer_id,
        k=k,
        centroids=centroids,
        iterations=len(history),
        objective=history[-1],
        objective_history=history,
    )


def assign(model: ClusterModel, layer_values: np.ndarray) -> np.ndarray:
    """Assign every pixel of a (C, S, S) layer to its most similar centroid.

    Ties resolve to the lowest cluster id; all-zero feature vectors are
    assigned cluster 0 by convention.
    """
    values = np.asarray(layer_values, dtype=np.float64)
    c, s, s2 = values.shape
    if c != model.centroids.shape[1]:
        raise ValueError(
            f"layer has {c} channels but centroids have dimension {model.centroids.shape[1]}"
        )
    flat = values.reshape(c, -1).T
    norms = np.linalg.norm(flat, axis=1)
    xn = flat / np.maximum(norms, _EPS)[:, None]
    sims = xn @ model.centroids.T
    ids = sims.argmax(axis=1)
    ids[norms < _EPS] = 0
    return ids.reshape(s, s2).astype(np.int32)


def sample_training_pixels(
    stacks: list[FeatureStack],
    per_layer_budget: int = DEFAULT_PIXEL_BUDGET,
    seed: int = 0,
) -> dict[int, np.ndarray]:
    """Uniform without-replacement pixel sample per layer across <= 100 stacks."""
    if not stacks:
        raise ValueError("at least one feature stack is required")
    stacks = stacks[:MAX_STACKS]
    return sample_training_pixels_streaming(
        lambda i: stacks[i], len(stacks), per_layer_budget, seed
    )


def sample_training_pixels_streaming(
    provider,
    n_stacks: int,
    per_layer_budget: int = DEFAULT_PIXEL_BUDGET,
    seed: int = 0,
) -> dict[int, np.ndarray]:
    """Like sample_training_pixels, but pulls stacks one at a time.

    provider(i) must return the i-th FeatureStack; it is called once per
    stack, so stacks can be regenerated or loaded lazily.
    """
    if n_stacks < 1:
        raise ValueError("at least one feature stack is required")
    if per_layer_budget < 1:
        raise ValueError("per_layer_budget must be >= 1")
    n_stacks = min(n_stacks, MAX_STACKS)

    first = provider(0)
    shapes = [(layer.size, layer.channels) for layer in first.layers]

    chosen = {}
    samples = {}
    for layer_id, (size, c) in enumerate(shapes):
        per_stack = size * size
        total = per_stack * n_stacks
        rng = stream(seed, "pixel-sample", layer_id)
        if per_layer_budget >= total:
            chosen[layer_id] = np.arange(total)
        else:
            chosen[layer_id] = np.sort(rng.choice(total, size=per_layer_budget, replace=False))
        samples[layer_id] = np.empty((len(chosen[layer_id]), c), dtype=np.float64)

    for si in range(n_stacks):
        stack = first if si == 0 else provider(si)
        for layer_id, (size, c) in enumerate(shapes):
            per_stack = size * size
            sel = chosen[layer_id]
            lo = np.searchsorted(sel, si * per_stack)
            hi = np.searchsorted(sel, (si + 1) * per_stack)
            if lo == hi:
                continue
            local = sel[lo:hi] - si * per_stack
            flat = stack.layers[layer_id].values.reshape(c, -1)
            samples[layer_id][lo:hi] = flat[:, local].T
    return samples


# ---------------------------------------------------------------------------
# persistence


def model_to_json(model: ClusterModel) -> str:
    payload = {
        "layer_id": model.layer_id,
        "k": model.k,
        "centroids": model.centroids.tolist(),
        "fit_meta": {
            "iterations": model.iterations,
            "objective": model.objective,
            "objective_history": model.objective_history,
        },
    }
    return json.dumps(payload, sort_keys=True)


def save_model(model: ClusterModel, path) -> None:
    with open(path, "w") as fh:
        fh.write(model_to_json(model))


def load_model(path) -> ClusterModel:
    with open(path) as fh:
        payload = json.load(fh)
    return ClusterModel(
        layer_id=payload["layer_id"],
        k=payload["k"],
        centroids=np.asarray(payload["centroids"], dtype=np.float64),
        iterations=payload["fit_meta"]["iterations"],
        objective=payload["fit_meta"]["objective"],
        objective_history=list(payload["fit_meta"]["objective_history"]),
    )
