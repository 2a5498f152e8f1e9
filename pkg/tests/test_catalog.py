import numpy as np
import pytest

from synthdocseg.catalog import (
    ClusterCatalog,
    ClusterClass,
    LayerCatalog,
    LayerRole,
    catalog_from_json,
    catalog_to_json,
    load_catalog,
    render_overlay,
    save_catalog,
    validate_catalog,
)
from synthdocseg.clustering import ClusterModel


def make_model(layer_id, k, dim=4):
    rng = np.random.default_rng(layer_id * 10 + k)
    c = rng.normal(size=(k, dim))
    c /= np.linalg.norm(c, axis=1, keepdims=True)
    return ClusterModel(layer_id=layer_id, k=k, centroids=c)


def make_valid_catalog():
    return ClusterCatalog(
        [
            LayerCatalog(6, 256, LayerRole.STRUCTURAL, {0: ClusterClass.BACKGROUND, 1: ClusterClass.TEXT}),
            LayerCatalog(2, 64, LayerRole.SEMANTIC, {
                0: ClusterClass.BACKGROUND,
                1: ClusterClass.PRINTED,
                2: ClusterClass.HANDWRITTEN,
            }),
            LayerCatalog(0, 32, LayerRole.IGNORED),
        ]
    )


def make_models():
    return {6: make_model(6, 2), 2: make_model(2, 3), 0: make_model(0, 5)}


def test_valid_catalog_has_no_problems():
    assert validate_catalog(make_valid_catalog(), make_models()) == []


def test_structural_layer_rejects_semantic_class():
    catalog = make_valid_catalog()
    catalog.layer(6).clusters[1] = ClusterClass.HANDWRITTEN
    problems = validate_catalog(catalog, make_models())
    assert any("not allowed for structural" in p for p in problems)


def test_missing_cluster_assignment_reported():
    catalog = make_valid_catalog()
    del catalog.layer(2).clusters[1]
    problems = validate_catalog(catalog, make_models())
    assert any("cluster 1 has no class assignment" in p for p in problems)


def test_cluster_id_out_of_range():
    catalog = make_valid_catalog()
    catalog.layer(2).clusters[3] = ClusterClass.PRINTED
    problems = validate_catalog(catalog, make_models())
    assert any("out of range" in p for p in problems)


def test_missing_model_reported():
    catalog = make_valid_catalog()
    problems = validate_catalog(catalog, {6: make_model(6, 2)})
    assert any("no cluster model" in p for p in problems)


def test_requires_structural_and_semantic():
    models = make_models()
    no_struct = ClusterCatalog([lc for lc in make_valid_catalog().layers if lc.role != LayerRole.STRUCTURAL])
    assert any("no structural layer" in p for p in validate_catalog(no_struct, models))
    no_sem = ClusterCatalog([lc for lc in make_valid_catalog().layers if lc.role != LayerRole.SEMANTIC])
    assert any("no semantic layer" in p for p in validate_catalog(no_sem, models))


def test_ignored_layer_needs_no_assignments():
    catalog = make_valid_catalog()
    assert catalog.layer(0).clusters == {}
    assert validate_catalog(catalog, make_models()) == []


def test_overlay_tints_exactly_the_cluster_pixels():
    rng = np.random.default_rng(0)
    patch = rng.random((256, 256, 3))
    assignment = rng.integers(0, 4, size=(64, 64)).astype(np.int32)
    out = render_overlay(patch, assignment, 2, k=4)
    changed = np.any(out != patch, axis=2)
    # every 64-pixel corresponds to a 4x4 block of the patch
    n_blocks = int((assignment == 2).sum())
    assert changed.sum() == n_blocks * 16
    # untouched pixels are bit-identical
    assert np.array_equal(out[~changed], patch[~changed])
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_overlay_rejects_out_of_range_cluster():
    patch = np.zeros((256, 256, 3))
    assignment = np.zeros((64, 64), dtype=np.int32)
    with pytest.raises(ValueError):
        render_overlay(patch, assignment, -1)
    with pytest.raises(ValueError):
        render_overlay(patch, assignment, 4, k=4)


def test_json_roundtrip_preserves_content(tmp_path):
    catalog = make_valid_catalog()
    save_catalog(catalog, tmp_path / "c.json")
    loaded = load_catalog(tmp_path / "c.json")
    assert len(loaded.layers) == 3
    assert loaded.layer(6).role == LayerRole.STRUCTURAL
    assert loaded.layer(2).clusters[2] == ClusterClass.HANDWRITTEN
    assert loaded.layer(0).clusters == {}


def test_canonical_json_is_stable():
    catalog = make_valid_catalog()
    text = catalog_to_json(catalog)
    assert catalog_to_json(catalog_from_json(text)) == text
    # layer order in memory must not affect the serialized form
    shuffled = ClusterCatalog(list(reversed(catalog.layers)))
    assert catalog_to_json(shuffled) == text
