import numpy as np
import pytest

from synthdocseg.datasynth import Category, DatasetManifest, ManifestEntry
from synthdocseg.imagecore import save_gray_png, save_label_png
from synthdocseg.segmenter import (
    SegModel,
    TrainConfig,
    _forward,
    _loss_and_grads,
    cosine_lr,
    extract_features,
    extract_features_batch,
    feature_dim,
    init_model,
    load_model,
    predict_image,
    predict_patch,
    save_model,
    train,
)

PYRAMID = (3, 9, 27)


def test_feature_dim():
    assert feature_dim(15) == 229
    assert feature_dim(7) == 53


def test_cosine_lr_endpoints():
    assert cosine_lr(0, 100, 0.01) == pytest.approx(0.01)
    assert cosine_lr(100, 100, 0.01) == pytest.approx(0.0)
    assert cosine_lr(50, 100, 0.01) == pytest.approx(0.005)
    assert cosine_lr(100, 100, 0.01, lr_min=0.001) == pytest.approx(0.001)


def test_cosine_lr_monotone_decreasing():
    vals = [cosine_lr(t, 200, 0.1) for t in range(201)]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_features_match_naive_oracle_interior():
    rng = np.random.default_rng(0)
    image = rng.random((64, 64))
    window = 15
    r = window // 2
    for y, x in [(20, 20), (31, 40), (25, 33)]:
        feats = extract_features(image, x, y, window)
        win = image[y - r : y + r + 1, x - r : x + r + 1]
        assert np.allclose(feats[: window * window], win.ravel())
        for i, s in enumerate(PYRAMID):
            q = s // 2
            block = image[y - q : y + q + 1, x - q : x + q + 1]
            assert feats[window * window + i] == pytest.approx(block.mean(), abs=1e-12)
        assert feats[-1] == pytest.approx(np.mean(win * win) - np.mean(win) ** 2, abs=1e-12)


def test_features_constant_image():
    image = np.full((32, 32), 0.4)
    feats = extract_features(image, 5, 5, 7)
    assert np.allclose(feats[:-1], 0.4)
    assert feats[-1] == pytest.approx(0.0, abs=1e-12)


def test_features_out_of_bounds():
    with pytest.raises(ValueError):
        extract_features(np.zeros((16, 16)), 16, 0)


def test_batch_matches_single():
    rng = np.random.default_rng(1)
    image = rng.random((40, 40))
    ys = np.array([0, 5, 39, 17])
    xs = np.array([39, 2, 0, 30])
    batch = extract_features_batch(image, ys, xs, 7)
    for i in range(4):
        assert np.allclose(batch[i], extract_features(image, int(xs[i]), int(ys[i]), 7))


def test_forward_is_a_distribution():
    cfg = TrainConfig(window=7, hidden_width=8)
    model = init_model(cfg)
    rng = np.random.default_rng(2)
    feats = rng.random((10, feature_dim(7))) * 100  # large inputs must stay stable
    probs, _ = _forward(model, feats)
    assert np.all(np.isfinite(probs))
    assert np.allclose(probs.sum(axis=1), 1.0)


@pytest.mark.parametrize("hidden", [0, 5])
def test_gradients_match_finite_differences(hidden):
    cfg = TrainConfig(window=3, hidden_width=hidden, seed=4)
    model = init_model(cfg)
    rng = np.random.default_rng(3)
    feats = rng.normal(size=(6, feature_dim(3)))
    targets = rng.integers(0, 3, size=6)
    _, grads = _loss_and_grads(model, feats, targets)
    eps = 1e-6
    for name in grads:
        arr = getattr(model, name)
        numeric = np.zeros_like(arr)
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = arr[idx]
            arr[idx] = orig + eps
            lp, _ = _loss_and_grads(model, feats, targets)
            arr[idx] = orig - eps
            lm, _ = _loss_and_grads(model, feats, targets)
            arr[idx] = orig
            numeric[idx] = (lp - lm) / (2 * eps)
        assert np.allclose(grads[name], numeric, atol=1e-5), name


def test_init_deterministic_by_seed():
    a = init_model(TrainConfig(seed=5))
    b = init_model(TrainConfig(seed=5))
    c = init_model(TrainConfig(seed=6))
    assert np.array_equal(a.w1, b.w1) and np.array_equal(a.w2, b.w2)
    assert not np.array_equal(a.w1, c.w1)


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        TrainConfig(iterations=0)
    with pytest.raises(ValueError):
        TrainConfig(batch_pixels=0)


def _toy_manifest(tmp_path, n=6, seed0=0):
    """Patches where intensity alone determines the class."""
    root = tmp_path
    (root / "patches").mkdir(exist_ok=True)
    (root / "labels").mkdir(exist_ok=True)
    entries = []
    for i in range(n):
        rng = np.random.default_rng(seed0 + i)
        img = np.full((256, 256), 0.95)
        lab = np.zeros((256, 256), dtype=np.uint8)
        for _ in range(6):
            y, x = rng.integers(0, 220, size=2)
            cls = int(rng.integers(1, 3))
            img[y : y + 30, x : x + 30] = 0.1 if cls == 1 else 0.5
            lab[y : y + 30, x : x + 30] = cls
        img += rng.normal(0, 0.01, img.shape)
        img = np.clip(np.round(img * 255) / 255, 0, 1)
        save_gray_png(img, root / f"patches/{i}.png")
        save_label_png(lab, root / f"labels/{i}.png")
        entries.append(
            ManifestEntry(i, f"patches/{i}.png", f"labels/{i}.png", Category.HANDWRITING_CONTAINING, "", "")
        )
    return DatasetManifest(root=root, seed=0, generator_config={}, catalog_sha256="", models_sha256="", entries=entries)


def test_training_learns_separable_toy(tmp_path):
    manifest = _toy_manifest(tmp_path)
    cfg = TrainConfig(iterations=600, window=7, hidden_width=16, batch_patches=4, seed=1)
    model = train(manifest, cfg, aug_config=None)
    assert model.meta["mean_loss_last_100"] < model.meta["mean_loss_first_100"]

    # held-out patch drawn from the same toy distribution
    rng = np.random.default_rng(99)
    img = np.full((256, 256), 0.95)
    lab = np.zeros((256, 256), dtype=np.uint8)
    img[50:90, 50:90] = 0.1
    lab[50:90, 50:90] = 1
    img[150:190, 120:160] = 0.5
    lab[150:190, 120:160] = 2
    img = np.clip(img + rng.normal(0, 0.01, img.shape), 0, 1)
    conf = predict_patch(model, img)
    pred = conf.argmax(axis=2)
    assert (pred == lab).mean() >= 0.9


def test_train_rejects_empty_manifest(tmp_path):
    empty = DatasetManifest(root=tmp_path, seed=0, generator_config={}, catalog_sha256="", models_sha256="")
    with pytest.raises(ValueError):
        train(empty, TrainConfig(iterations=1))


def test_train_determinism(tmp_path):
    manifest = _toy_manifest(tmp_path, n=3)
    cfg = TrainConfig(iterations=20, window=5, hidden_width=4, batch_patches=2, seed=2)
    a = train(manifest, cfg)
    b = train(manifest, cfg)
    assert np.array_equal(a.w1, b.w1) and np.array_equal(a.w2, b.w2)


def test_predict_patch_shape_and_simplex():
    model = init_model(TrainConfig(window=7, hidden_width=4))
    rng = np.random.default_rng(7)
    conf = predict_patch(model, rng.random((256, 256)))
    assert conf.shape == (256, 256, 3)
    assert np.allclose(conf.sum(axis=2), 1.0)
    with pytest.raises(ValueError):
        predict_patch(model, rng.random((128, 128)))


def test_predict_image_matches_per_pixel_forward():
    model = init_model(TrainConfig(window=5, hidden_width=4, seed=8))
    rng = np.random.default_rng(8)
    image = rng.random((12, 14))
    conf = predict_image(model, image)
    for y in range(12):
        for x in range(14):
            feats = extract_features(image, x, y, 5)[None]
            assert np.allclose(conf[y, x], _forward(model, feats)[0][0])


def test_model_file_roundtrip(tmp_path):
    model = init_model(TrainConfig(window=7, hidden_width=8, seed=9))
    model.meta = {"final_loss": 0.25}
    save_model(model, tmp_path / "m.segm")
    loaded = load_model(tmp_path / "m.segm")
    assert loaded.window == 7 and loaded.hidden_width == 8
    # weights stored as float32
    assert np.allclose(loaded.w1, model.w1, atol=1e-6)
    assert np.allclose(loaded.w2, model.w2, atol=1e-6)
    assert loaded.meta == {"final_loss": 0.25}
    raw = (tmp_path / "m.segm").read_bytes()
    assert raw[:4] == b"SEGM"


def test_model_roundtrip_linear(tmp_path):
    model = init_model(TrainConfig(window=5, hidden_width=0, seed=10))
    save_model(model, tmp_path / "lin.segm")
    loaded = load_model(tmp_path / "lin.segm")
    assert loaded.w2 is None and loaded.b2 is None
    assert np.allclose(loaded.w1, model.w1, atol=1e-6)


def test_load_rejects_bad_magic(tmp_path):
    (tmp_path / "bad.segm").write_bytes(b"XXXX" + b"\x00" * 32)
    with pytest.raises(ValueError):
        load_model(tmp_path / "bad.segm")
