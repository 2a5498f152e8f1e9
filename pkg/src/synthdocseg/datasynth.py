"""Dataset synthesis: generate -> assign -> fuse per seed, then balance.

The manifest is JSON lines: one header record carrying provenance (generator
config, catalog and cluster-model hashes) followed by one record per (patch,
label) pair with its class-content category and file hashes.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from . import clustering
from .catalog import ClusterCatalog, catalog_to_json, validate_catalog
from .clustering import ClusterModel, model_to_json
from .docgen import GenConfig, generate_patch
from .fusion import fuse_labels
from .imagecore import HANDWRITTEN, PRINTED, save_label_png, save_rgb_png
from .rng import stream

MIN_CLASS_PIXELS = 32
DEFAULT_BACKGROUND_FRACTION = 0.1


class Category(str, Enum):
    BACKGROUND_ONLY = "background_only"
    PRINTED_ONLY = "printed_only"
    HANDWRITING_CONTAINING = "handwriting_containing"


@dataclass
class ManifestEntry:
    seed: int
    patch: str
    label: str
    category: Category
    patch_sha256: str
    label_sha256: str


@dataclass
class DatasetManifest:
    root: Path
    seed: int
    generator_config: dict
    catalog_sha256: str
    models_sha256: str
    entries: list[ManifestEntry] = field(default_factory=list)

    def by_category(self, category: Category) -> list[ManifestEntry]:
        return [e for e in self.entries if e.category == category]


def categorize_patch(label: np.ndarray, min_class_pixels: int = MIN_CLASS_PIXELS) -> Category:
    """Handwriting takes precedence over printed for mixed patches."""
    if int((label == HANDWRITTEN).sum()) >= min_class_pixels:
        return Category.HANDWRITING_CONTAINING
    if int((label == PRINTED).sum()) >= min_class_pixels:
        return Category.PRINTED_ONLY
    return Category.BACKGROUND_ONLY


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def catalog_hash(catalog: ClusterCatalog) -> str:
    return hashlib.sha256(catalog_to_json(catalog).encode()).hexdigest()


def models_hash(models: dict[int, ClusterModel]) -> str:
    h = hashlib.sha256()
    for lid in sorted(models):
        h.update(model_to_json(models[lid]).encode())
    return h.hexdigest()


def derive_patch_seed(seed: int, index: int) -> int:
    digest = hashlib.blake2b(f"dataset/{seed}/{index}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def synthesize_dataset(
    n: int,
    seed: int,
    config: GenConfig,
    models: dict[int, ClusterModel],
    catalog: ClusterCatalog,
    out_dir,
    min_class_pixels: int = MIN_CLASS_PIXELS,
) -> DatasetManifest:
    if n < 1:
        raise ValueError("n must be >= 1")
    problems = validate_catalog(catalog, models)
    if problems:
        raise ValueError("invalid catalog: " + "; ".join(problems))

    out_dir = Path(out_dir)
    (out_dir / "patches").mkdir(parents=True, exist_ok=True)
    (out_dir / "labels").mkdir(parents=True, exist_ok=True)

    manifest = DatasetManifest(
        root=out_dir,
        seed=seed,
        generator_config=vars(config).copy(),
        catalog_sha256=catalog_hash(catalog),
        models_sha256=models_hash(models),
    )
    annotated = {lc.layer_id for lc in catalog.layers}
    for i in range(n):
        patch_seed = derive_patch_seed(seed, i)
        rgb, _, stack = generate_patch(patch_seed, config)
        assignments = {
            lid: clustering.assign(models[lid], stack.layer(lid).values)
            for lid in sorted(annotated)
            if lid in models
        }
        fused = fuse_labels(assignments, catalog)
        patch_rel = f"patches/{i:05d}.png"
        label_rel = f"labels/{i:05d}.png"
        save_rgb_png(rgb, out_dir / patch_rel)
        save_label_png(fused, out_dir / label_rel)
        manifest.entries.append(
            ManifestEntry(
                seed=patch_seed,
                patch=patch_rel,
                label=label_rel,
                category=categorize_patch(fused, min_class_pixels),
                patch_sha256=_sha256_file(out_dir / patch_rel),
                label_sha256=_sha256_file(out_dir / label_rel),
            )
        )
    return manifest


def balance(
    manifest: DatasetManifest,
    seed: int,
    background_fraction: float = DEFAULT_BACKGROUND_FRACTION,
) -> DatasetManifest:
    """Down-sample so both text categories have equal counts.

    Keeps m = min(#handwriting, #printed) entries of each text category plus
    round(background_fraction * 2m) background-only entries (capped at what
    exists); selection is uniform without replacement, deterministic by seed.
    """
    if not 0.0 <= background_fraction <= 1.0:
        raise ValueError("background_fraction must be in [0, 1]")
    hand = manifest.by_category(Category.HANDWRITING_CONTAINING)
    printed = manifest.by_category(Category.PRINTED_ONLY)
    bg = manifest.by_category(Category.BACKGROUND_ONLY)
    if not hand or not printed:
        raise ValueError(
            "cannot balance: need at least one entry of each text category "
            f"(handwriting={len(hand)}, printed={len(printed)})"
        )
    m = min(len(hand), len(printed))
    n_bg = min(round(background_fraction * 2 * m), len(bg))

    rng = stream(seed, "balance")
    chosen = []
    for group, count in ((hand, m), (printed, m), (bg, n_bg)):
        idx = np.sort(rng.choice(len(group), size=count, replace=False))
        chosen.extend(group[int(i)] for i in idx)

    return DatasetManifest(
        root=manifest.root,
        seed=manifest.seed,
        generator_config=manifest.generator_config,
        catalog_sha256=manifest.catalog_sha256,
        models_sha256=manifest.models_sha256,
        entries=chosen,
    )


# ---------------------------------------------------------------------------
# persistence


def save_manifest(manifest: DatasetManifest, path) -> None:
    with open(path, "w") as fh:
        header = {
            "kind": "header",
            "seed": manifest.seed,
            "generator_config": manifest.generator_config,
            "catalog_sha256": manifest.catalog_sha256,
            "models_sha256": manifest.models_sha256,
            "count": len(manifest.entries),
        }
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for e in manifest.entries:
            record = {
                "kind": "entry",
                "seed": e.seed,
                "patch": e.patch,
                "label": e.label,
                "category": e.category.value,
                "patch_sha256": e.patch_sha256,
                "label_sha256": e.label_sha256,
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def load_manifest(path, verify: bool = True) -> DatasetManifest:
    path = Path(path)
    root = path.parent
    with open(path) as fh:
        header = json.loads(fh.readline())
        if header.get("kind") != "header":
            raise ValueError("manifest must start with a header record")
        manifest = DatasetManifest(
            root=root,
            seed=header["seed"],
            generator_config=header["generator_config"],
            catalog_sha256=header["catalog_sha256"],
            models_sha256=header["models_sha256"],
        )
        for line in fh:
            rec = json.loads(line)
            entry = ManifestEntry(
                seed=rec["seed"],
                patch=rec["patch"],
                label=rec["label"],
                category=Category(rec["category"]),
                patch_sha256=rec["patch_sha256"],
                label_sha256=rec["label_sha256"],
            )
            if verify:
                for rel, expect in ((entry.patch, entry.patch_sha256), (entry.label, entry.label_sha256)):
                    actual = _sha256_file(root / rel)
                    if actual != expect:
                        raise ValueError(f"hash mismatch for {rel}")
            manifest.entries.append(entry)
    return manifest
