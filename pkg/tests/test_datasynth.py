import copy

import numpy as np
import pytest
from synthdocseg.datasynth import (
    Category,
    DatasetManifest,
    ManifestEntry,
    balance,
    categorize_patch,
    derive_patch_seed,
    load_manifest,
    save_manifest,
    synthesize_dataset,
)
from synthdocseg.clustering import assign, fit_spherical_kmeans, sample_training_pixels
from synthdocseg.docgen import GenConfig, generate_patch
from synthdocseg.fusion import build_oracle_catalog


@pytest.fixture(scope="module")
def fitted():
    cfg = GenConfig()
    patches = [generate_patch(seed, cfg) for seed in range(10)]
    stacks = [p[2] for p in patches]
    samples = sample_training_pixels(stacks, per_layer_budget=3000, seed=0)
    models = {
        lid: fit_spherical_kmeans(vals, k=10, seed=0, layer_id=lid)
        for lid, vals in samples.items()
    }
    sizes = {lid: stacks[0].layers[lid].size for lid in range(len(stacks[0].layers))}
    assignments = [
        {lid: assign(models[lid], st.layers[lid].values) for lid in models}
        for st in stacks
    ]
    catalog = build_oracle_catalog(assignments, [p[1] for p in patches], sizes)
    return cfg, models, catalog


def test_categorize_background():
    assert categorize_patch(np.zeros((256, 256), dtype=np.uint8)) == Category.BACKGROUND_ONLY


def test_categorize_threshold_is_inclusive():
    label = np.zeros((256, 256), dtype=np.uint8)
    label.flat[:31] = 1
    assert categorize_patch(label) == Category.BACKGROUND_ONLY
    label.flat[31] = 1
    assert categorize_patch(label) == Category.PRINTED_ONLY


def test_categorize_handwriting_takes_precedence():
    label = np.zeros((256, 256), dtype=np.uint8)
    label.flat[:5000] = 1
    label.flat[5000:5032] = 2
    assert categorize_patch(label) == Category.HANDWRITING_CONTAINING


def test_derived_seeds_distinct_and_stable():
    seeds = [derive_patch_seed(7, i) for i in range(1000)]
    assert len(set(seeds)) == 1000
    assert seeds[0] == derive_patch_seed(7, 0)


def test_synthesize_writes_files_and_manifest(tmp_path, fitted):
    cfg, models, catalog = fitted
    manifest = synthesize_dataset(6, 3, cfg, models, catalog, tmp_path)
    assert len(manifest.entries) == 6
    for e in manifest.entries:
        assert (tmp_path / e.patch).exists()
        assert (tmp_path / e.label).exists()
    save_manifest(manifest, tmp_path / "manifest.jsonl")
    loaded = load_manifest(tmp_path / "manifest.jsonl", verify=True)
    assert [e.patch_sha256 for e in loaded.entries] == [e.patch_sha256 for e in manifest.entries]
    assert loaded.catalog_sha256 == manifest.catalog_sha256


def test_synthesize_is_deterministic(tmp_path, fitted):
    cfg, models, catalog = fitted
    a = synthesize_dataset(4, 11, cfg, models, catalog, tmp_path / "a")
    b = synthesize_dataset(4, 11, cfg, models, catalog, tmp_path / "b")
    assert [e.patch_sha256 for e in a.entries] == [e.patch_sha256 for e in b.entries]
    assert [e.label_sha256 for e in a.entries] == [e.label_sha256 for e in b.entries]
    assert [e.category for e in a.entries] == [e.category for e in b.entries]


def test_synthesize_rejects_invalid_catalog(tmp_path, fitted):
    cfg, models, catalog = fitted
    broken = copy.deepcopy(catalog)
    del broken.layer(2).clusters[0]
    with pytest.raises(ValueError):
        synthesize_dataset(2, 0, cfg, models, broken, tmp_path)


def test_load_manifest_detects_tampering(tmp_path, fitted):
    cfg, models, catalog = fitted
    manifest = synthesize_dataset(2, 5, cfg, models, catalog, tmp_path)
    save_manifest(manifest, tmp_path / "manifest.jsonl")
    target = tmp_path / manifest.entries[0].label
    target.write_bytes(target.read_bytes()[:-1] + b"\x00")
    with pytest.raises(ValueError, match="hash mismatch"):
        load_manifest(tmp_path / "manifest.jsonl", verify=True)
    # verification can be skipped explicitly
    load_manifest(tmp_path / "manifest.jsonl", verify=False)


def _fake_manifest(n_hand, n_printed, n_bg):
    entries = []
    i = 0
    for cat, n in (
        (Category.HANDWRITING_CONTAINING, n_hand),
        (Category.PRINTED_ONLY, n_printed),
        (Category.BACKGROUND_ONLY, n_bg),
    ):
        for _ in range(n):
            entries.append(
                ManifestEntry(i, f"patches/{i}.png", f"labels/{i}.png", cat, "x", "y")
            )
            i += 1
    return DatasetManifest(
        root=None, seed=0, generator_config={}, catalog_sha256="c", models_sha256="m", entries=entries
    )


def test_balance_counts():
    balanced = balance(_fake_manifest(5, 9, 10), seed=1, background_fraction=0.1)
    assert len(balanced.by_category(Category.HANDWRITING_CONTAINING)) == 5
    assert len(balanced.by_category(Category.PRINTED_ONLY)) == 5
    assert len(balanced.by_category(Category.BACKGROUND_ONLY)) == 1
    # balanced entries are a subset of the originals
    originals = {e.seed for e in _fake_manifest(5, 9, 10).entries}
    assert all(e.seed in originals for e in balanced.entries)


def test_balance_background_capped_by_supply():
    balanced = balance(_fake_manifest(10, 10, 1), seed=0, background_fraction=0.5)
    assert len(balanced.by_category(Category.BACKGROUND_ONLY)) == 1


def test_balance_determinism():
    a = balance(_fake_manifest(8, 20, 30), seed=9)
    b = balance(_fake_manifest(8, 20, 30), seed=9)
    assert [e.seed for e in a.entries] == [e.seed for e in b.entries]


def test_balance_requires_both_text_categories():
    with pytest.raises(ValueError):
        balance(_fake_manifest(0, 5, 5), seed=0)
    with pytest.raises(ValueError):
        balance(_fake_manifest(5, 5, 5), seed=0, background_fraction=1.5)
