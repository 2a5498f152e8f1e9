"""Command-line orchestration of the pipeline.

Subcommands: gen-corpus, fit-clusters, annotate, fuse-preview, synth-dataset,
train, infer, eval, grid-search, e2e.  All artifacts land under a run
directory (flag --run-dir, env SYNTHDOCSEG_RUN_DIR, default ./run) together
with a provenance record of configs, input hashes and the tool version.

Exit codes: 0 success, 2 usage error, 3 validation failure, 4 runtime
failure.  Failures also emit one machine-readable JSON line on stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, clustering, datasynth, fusion, gridsearch, metrics, segmenter
from .augment import AugmentConfig
from .catalog import load_catalog, save_catalog, validate_catalog
from .datasynth import balance, load_manifest, save_manifest, synthesize_dataset
from .docgen import (
    GenConfig,
    generate_document,
    generate_patch,
    save_feature_stack,
)
from .imagecore import (
    load_label_png,
    load_rgb_png,
    save_label_png,
    save_label_viz_png,
    save_rgb_png,
)
from .inference import PostprocessParams, segment_document
from .rng import stream

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_RUNTIME = 4

RUN_DIR_ENV = "SYNTHDOCSEG_RUN_DIR"


class ValidationFailure(Exception):
    pass


def _derive(seed: int, *tags) -> int:
    digest = hashlib.blake2b("/".join(map(str, tags)).encode() + seed.to_bytes(8, "little", signed=False), digest_size=8)
    return int.from_bytes(digest.digest(), "little")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _record_provenance(run_dir: Path, command: str, params: dict, outputs: dict[str, Path]):
    path = run_dir / "provenance.json"
    records = json.loads(path.read_text()) if path.exists() else []
    records.append(
        {
            "command": command,
            "tool_version": __version__,
            "params": params,
            "outputs": {name: _sha256(p) for name, p in sorted(outputs.items())},
        }
    )
    path.write_text(json.dumps(records, sort_keys=True, indent=2))


# ---------------------------------------------------------------------------
# config handling: TOML file values are overridden by explicit flags


def _load_toml(path) -> dict:
    import tomli

    with open(path, "rb") as fh:
        return tomli.load(fh)


def _pick(args, config: dict, section: str, key: str, default):
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    sec = config.get(section, {})
    if key in sec:
        return sec[key]
    return default


def _gen_config(args, config, section) -> GenConfig:
    return GenConfig(
        printed_density=_pick(args, config, section, "printed_density", 0.5),
        handwriting_probability=_pick(args, config, section, "handwriting_probability", 0.3),
        feature_noise_sigma=_pick(args, config, section, "feature_noise_sigma", 0.0),
        background_texture_level=_pick(args, config, section, "background_texture_level", 0.5),
    )


def _load_models(run_dir: Path) -> dict:
    clusters_dir = run_dir / "clusters"
    models = {}
    for path in sorted(clusters_dir.glob("layer_*.json")):
        model = clustering.load_model(path)
        models[model.layer_id] = model
    if not models:
        raise ValidationFailure(f"no cluster models under {clusters_dir}")
    return models


def _require_catalog(run_dir: Path):
    path = run_dir / "catalog.json"
    if not path.exists():
        raise ValidationFailure(f"no catalog at {path}; run annotate or e2e first")
    return load_catalog(path)


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_corpus(args, config, run_dir: Path) -> int:
    n = _pick(args, config, "gen_corpus", "patches", 200)
    seed = _pick(args, config, "gen_corpus", "seed", 0)
    gen_cfg = _gen_config(args, config, "gen_corpus")
    corpus = run_dir / "corpus"
    for sub in ("patches", "labels", "stacks"):
        (corpus / sub).mkdir(parents=True, exist_ok=True)
    for i in range(n):
        patch_seed = _derive(seed, "corpus", i)
        rgb, label, stack = generate_patch(patch_seed, gen_cfg)
        save_rgb_png(rgb, corpus / "patches" / f"{i:05d}.png")
        save_label_png(label, corpus / "labels" / f"{i:05d}.png")
        save_feature_stack(stack, corpus / "stacks" / f"{i:05d}.fstk")
    meta = {"patches": n, "seed": seed, "generator_config": vars(gen_cfg)}
    (corpus / "meta.json").write_text(json.dumps(meta, sort_keys=True))
    _record_provenance(run_dir, "gen-corpus", meta, {"corpus/meta.json": corpus / "meta.json"})
    print(f"wrote {n} patches to {corpus}")
    return EXIT_OK


def cmd_fit_clusters(args, config, run_dir: Path) -> int:
    from .docgen import load_feature_stack

    corpus = run_dir / "corpus"
    stack_files = sorted((corpus / "stacks").glob("*.fstk"))
    if not stack_files:
        raise ValidationFailure(f"no feature stacks under {corpus}/stacks; run gen-corpus first")
    k = _pick(args, config, "fit_clusters", "k", clustering.DEFAULT_K)
    seed = _pick(args, config, "fit_clusters", "seed", 0)
    budget = _pick(args, config, "fit_clusters", "pixel_budget", clustering.DEFAULT_PIXEL_BUDGET)
    n_stacks = min(len(stack_files), clustering.MAX_STACKS)
    samples = clustering.sample_training_pixels_streaming(
        lambda i: load_feature_stack(stack_files[i]), n_stacks, budget, seed
    )
    out_dir = run_dir / "clusters"
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = {}
    for layer_id, layer_samples in samples.items():
        model = clustering.fit_spherical_kmeans(layer_samples, k=k, seed=seed, layer_id=layer_id)
        path = out_dir / f"layer_{layer_id}.json"
        clustering.save_model(model, path)
        outputs[f"clusters/layer_{layer_id}.json"] = path
        print(f"layer {layer_id}: objective {model.objective:.1f} after {model.iterations} iterations")
    _record_provenance(run_dir, "fit-clusters", {"k": k, "seed": seed, "pixel_budget": budget}, outputs)
    return EXIT_OK


def cmd_annotate(args, config, run_dir: Path) -> int:
    import uvicorn

    from .server import create_app

    try:
        app = create_app(run_dir, frontend_dir=getattr(args, "frontend_dir", None))
    except FileNotFoundError as exc:
        raise ValidationFailure(str(exc))
    port = _pick(args, config, "annotate", "port", 8000)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
    return EXIT_OK


def cmd_fuse_preview(args, config, run_dir: Path) -> int:
    from .docgen import load_feature_stack

    models = _load_models(run_dir)
    catalog = _require_catalog(run_dir)
    problems = validate_catalog(catalog, models)
    if problems:
        raise ValidationFailure("invalid catalog: " + "; ".join(problems))
    stack_files = sorted((run_dir / "corpus" / "stacks").glob("*.fstk"))
    if not stack_files:
        raise ValidationFailure("no corpus feature stacks; run gen-corpus first")
    n = min(_pick(args, config, "fuse_preview", "samples", 8), len(stack_files))
    out_dir = run_dir / "fuse_preview"
    out_dir.mkdir(parents=True, exist_ok=True)
    for i in range(n):
        stack = load_feature_stack(stack_files[i])
        assignments = {
            lid: clustering.assign(models[lid], stack.layer(lid).values) for lid in models
        }
        fused = fusion.fuse_labels(assignments, catalog)
        save_label_viz_png(fused, out_dir / f"{i:03d}.png")
    print(f"wrote {n} fused previews to {out_dir}")
    return EXIT_OK


def cmd_synth_dataset(args, config, run_dir: Path) -> int:
    models = _load_models(run_dir)
    catalog = _require_catalog(run_dir)
    n = _pick(args, config, "synth_dataset", "size", 2000)
    seed = _pick(args, config, "synth_dataset", "seed", 0)
    bg_frac = _pick(args, config, "synth_dataset", "background_fraction", datasynth.DEFAULT_BACKGROUND_FRACTION)
    gen_cfg = _gen_config(args, config, "synth_dataset")
    out_dir = run_dir / "dataset"
    try:
        manifest = synthesize_dataset(n, seed, gen_cfg, models, catalog, out_dir)
        balanced = balance(manifest, _derive(seed, "balance"), bg_frac)
    except ValueError as exc:
        raise ValidationFailure(str(exc))
    save_manifest(manifest, out_dir / "manifest_raw.jsonl")
    save_manifest(balanced, out_dir / "manifest.jsonl")
    _record_provenance(
        run_dir,
        "synth-dataset",
        {"size": n, "seed": seed, "background_fraction": bg_frac, "generator_config": vars(gen_cfg)},
        {"dataset/manifest.jsonl": out_dir / "manifest.jsonl"},
    )
    print(f"dataset: {len(manifest.entries)} raw, {len(balanced.entries)} after balancing")
    return EXIT_OK


def cmd_train(args, config, run_dir: Path) -> int:
    manifest_path = run_dir / "dataset" / "manifest.jsonl"
    if not manifest_path.exists():
        raise ValidationFailure(f"no dataset manifest at {manifest_path}")
    manifest = load_manifest(manifest_path, verify=False)
    train_cfg = segmenter.TrainConfig(
        learning_rate=_pick(args, config, "train", "learning_rate", 0.2),
        iterations=_pick(args, config, "train", "iterations", 20_000),
        batch_pixels=_pick(args, config, "train", "batch_pixels", 8),
        batch_patches=_pick(args, config, "train", "batch_patches", 16),
        seed=_pick(args, config, "train", "seed", 0),
        hidden_width=_pick(args, config, "train", "hidden_width", 32),
    )
    model = segmenter.train(manifest, train_cfg)
    out_dir = run_dir / "model"
    out_dir.mkdir(parents=True, exist_ok=True)
    segmenter.save_model(model, out_dir / "seg.bin")
    _record_provenance(
        run_dir,
        "train",
        {k: v for k, v in model.meta.items()},
        {"model/seg.bin": out_dir / "seg.bin"},
    )
    print(f"trained model: final loss {model.meta['final_loss']:.4f}")
    return EXIT_OK


def _postprocess_params(args, config, section) -> PostprocessParams:
    return PostprocessParams(
        overlap_factor=_pick(args, config, section, "overlap_factor", 0.0),
        min_confidence=_pick(args, config, section, "min_confidence", 0.7),
        min_contour_area=_pick(args, config, section, "min_contour_area", 50),
    )


def cmd_infer(args, config, run_dir: Path) -> int:
    model_path = Path(args.model) if args.model else run_dir / "model" / "seg.bin"
    if not model_path.exists():
        raise ValidationFailure(f"no segmenter model at {model_path}")
    model = segmenter.load_model(model_path)
    params = _postprocess_params(args, config, "infer")
    document = load_rgb_png(args.input)
    label = segment_document(model, document, params)
    out_dir = run_dir / "infer"
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem
    save_label_png(label, out_dir / f"{stem}_label.png")
    save_label_viz_png(label, out_dir / f"{stem}_viz.png")
    print(f"wrote {out_dir / (stem + '_label.png')}")
    return EXIT_OK


def cmd_eval(args, config, run_dir: Path) -> int:
    pred_paths = _png_list(Path(args.pred))
    truth_paths = _png_list(Path(args.truth))
    if len(pred_paths) != len(truth_paths) or not pred_paths:
        raise ValidationFailure(
            f"prediction/truth count mismatch: {len(pred_paths)} vs {len(truth_paths)}"
        )
    counts = np.zeros((3, 3), dtype=np.int64)
    for p, t in zip(pred_paths, truth_paths):
        counts += metrics.confusion(load_label_png(p), load_label_png(t))
    rep = metrics.report(counts)
    out_dir = run_dir / "eval"
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(metrics.report_to_json(rep))
    (out_dir / "report.txt").write_text(metrics.report_to_table(rep))
    print(metrics.report_to_table(rep))
    return EXIT_OK


def _png_list(path: Path) -> list[Path]:
    if path.is_dir():
        return sorted(path.glob("*.png"))
    return [path]


def cmd_grid_search(args, config, run_dir: Path) -> int:
    model_path = Path(args.model) if args.model else run_dir / "model" / "seg.bin"
    if not model_path.exists():
        raise ValidationFailure(f"no segmenter model at {model_path}")
    model = segmenter.load_model(model_path)
    gen_cfg = _gen_config(args, config, "grid_search")
    n_docs = _pick(args, config, "grid_search", "docs", 5)
    seed = _pick(args, config, "grid_search", "seed", 0)
    height = _pick(args, config, "grid_search", "doc_height", 512)
    width = _pick(args, config, "grid_search", "doc_width", 512)
    eval_set = []
    for i in range(n_docs):
        rgb, truth = generate_document(_derive(seed, "grid-doc", i), gen_cfg, height, width)
        eval_set.append((rgb, truth))
    result = gridsearch.grid_search(model, eval_set)
    out_dir = run_dir / "grid"
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "results.json").write_text(gridsearch.result_to_json(result))
    (out_dir / "results.txt").write_text(gridsearch.result_to_table(result))
    print(gridsearch.result_to_table(result))
    return EXIT_OK


def cmd_e2e(args, config, run_dir: Path) -> int:
    seed = _pick(args, config, "e2e", "seed", 7)
    n_patches = _pick(args, config, "e2e", "patches", 200)
    dataset_size = _pick(args, config, "e2e", "dataset_size", 2000)
    train_iters = _pick(args, config, "e2e", "train_iters", 6000)
    k = _pick(args, config, "e2e", "k", clustering.DEFAULT_K)
    grid_docs = _pick(args, config, "e2e", "grid_docs", 5)
    eval_docs = _pick(args, config, "e2e", "eval_docs", 10)
    oracle_patches = _pick(args, config, "e2e", "oracle_patches", 50)
    budget = _pick(args, config, "e2e", "pixel_budget", 60_000)
    gen_cfg = _gen_config(args, config, "e2e")
    run_dir.mkdir(parents=True, exist_ok=True)

    patch_seed = lambda i: _derive(seed, "corpus", i)

    print(f"[e2e] corpus: {n_patches} patches")
    corpus = run_dir / "corpus"
    for sub in ("patches", "labels", "stacks"):
        (corpus / sub).mkdir(parents=True, exist_ok=True)
    labels = []
    for i in range(n_patches):
        rgb, label, stack = generate_patch(patch_seed(i), gen_cfg)
        labels.append(label)
        save_rgb_png(rgb, corpus / "patches" / f"{i:05d}.png")
        save_label_png(label, corpus / "labels" / f"{i:05d}.png")
        if i < clustering.MAX_STACKS:
            save_feature_stack(stack, corpus / "stacks" / f"{i:05d}.fstk")

    print(f"[e2e] clustering: k={k}")
    provider = lambda i: generate_patch(patch_seed(i), gen_cfg)[2]
    samples = clustering.sample_training_pixels_streaming(
        provider, min(n_patches, clustering.MAX_STACKS), budget, seed
    )
    models = {}
    clusters_dir = run_dir / "clusters"
    clusters_dir.mkdir(exist_ok=True)
    for layer_id, layer_samples in samples.items():
        model = clustering.fit_spherical_kmeans(layer_samples, k=k, seed=seed, layer_id=layer_id)
        models[layer_id] = model
        clustering.save_model(model, clusters_dir / f"layer_{layer_id}.json")

    print(f"[e2e] oracle catalog from {oracle_patches} patches")
    assignments = []
    for i in range(min(oracle_patches, n_patches)):
        stack = provider(i)
        assignments.append(
            {lid: clustering.assign(models[lid], stack.layer(lid).values) for lid in models}
        )
    stack0 = provider(0)
    sizes = {layer.layer_id: layer.size for layer in stack0.layers}
    catalog = fusion.build_oracle_catalog(assignments, labels[: len(assignments)], sizes)
    problems = validate_catalog(catalog, models)
    if problems:
        raise ValidationFailure("oracle catalog invalid: " + "; ".join(problems))
    save_catalog(catalog, run_dir / "catalog.json")

    print(f"[e2e] dataset: {dataset_size} patches")
    dataset_dir = run_dir / "dataset"
    manifest = synthesize_dataset(
        dataset_size, _derive(seed, "dataset"), gen_cfg, models, catalog, dataset_dir
    )
    balanced = balance(manifest, _derive(seed, "balance"))
    save_manifest(manifest, dataset_dir / "manifest_raw.jsonl")
    save_manifest(balanced, dataset_dir / "manifest.jsonl")
    print(f"[e2e] balanced dataset: {len(balanced.entries)} entries")

    print(f"[e2e] training: {train_iters} iterations")
    train_cfg = segmenter.TrainConfig(iterations=train_iters, seed=seed)
    model = segmenter.train(balanced, train_cfg)
    model_dir = run_dir / "model"
    model_dir.mkdir(exist_ok=True)
    segmenter.save_model(model, model_dir / "seg.bin")

    print(f"[e2e] grid search on {grid_docs} documents")
    grid_set = [
        generate_document(_derive(seed, "grid-doc", i), gen_cfg, 512, 512)
        for i in range(grid_docs)
    ]
    result = gridsearch.grid_search(model, grid_set)
    grid_dir = run_dir / "grid"
    grid_dir.mkdir(exist_ok=True)
    (grid_dir / "results.json").write_text(gridsearch.result_to_json(result))
    (grid_dir / "results.txt").write_text(gridsearch.result_to_table(result))
    print(f"[e2e] best params: {result.best}")

    print(f"[e2e] evaluating on {eval_docs} documents")
    counts = np.zeros((3, 3), dtype=np.int64)
    for i in range(eval_docs):
        rgb, truth = generate_document(_derive(seed, "eval-doc", i), gen_cfg, 512, 512)
        pred = segment_document(model, rgb, result.best)
        counts += metrics.confusion(pred, truth)
    rep = metrics.report(counts)
    eval_dir = run_dir / "eval"
    eval_dir.mkdir(exist_ok=True)
    (eval_dir / "report.json").write_text(metrics.report_to_json(rep))
    (eval_dir / "report.txt").write_text(metrics.report_to_table(rep))
    print(metrics.report_to_table(rep))

    outputs = {
        "catalog.json": run_dir / "catalog.json",
        "dataset/manifest.jsonl": dataset_dir / "manifest.jsonl",
        "model/seg.bin": model_dir / "seg.bin",
        "grid/results.json": grid_dir / "results.json",
        "eval/report.json": eval_dir / "report.json",
    }
    params = {
        "seed": seed,
        "patches": n_patches,
        "dataset_size": dataset_size,
        "train_iters": train_iters,
        "k": k,
        "generator_config": vars(gen_cfg),
    }
    _record_provenance(run_dir, "e2e", params, outputs)
    combined = hashlib.sha256()
    for name in sorted(outputs):
        combined.update(_sha256(outputs[name]).encode())
    summary = {"miou": rep.miou, "iou": list(rep.iou), "provenance_hash": combined.hexdigest()}
    (run_dir / "e2e_summary.json").write_text(json.dumps(summary, sort_keys=True, indent=2))
    print(f"[e2e] provenance hash {combined.hexdigest()}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _add_gen_flags(p):
    p.add_argument("--printed-density", type=float, dest="printed_density")
    p.add_argument("--handwriting-probability", type=float, dest="handwriting_probability")
    p.add_argument("--feature-noise-sigma", type=float, dest="feature_noise_sigma")
    p.add_argument("--background-texture-level", type=float, dest="background_texture_level")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="synthdocseg")
    parser.add_argument("--run-dir", default=None, help=f"run directory (or env {RUN_DIR_ENV})")
    parser.add_argument("--config", default=None, help="TOML config file; flags override")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-corpus", help="generate patches, labels and feature stacks")
    p.add_argument("--patches", type=int)
    p.add_argument("--seed", type=int)
    _add_gen_flags(p)

    p = sub.add_parser("fit-clusters", help="fit per-layer spherical k-means models")
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--pixel-budget", type=int, dest="pixel_budget")

    p = sub.add_parser("annotate", help="serve the annotation UI and API")
    p.add_argument("--port", type=int)
    p.add_argument("--frontend-dir", dest="frontend_dir")

    p = sub.add_parser("fuse-preview", help="render fused labels for sample patches")
    p.add_argument("--samples", type=int)

    p = sub.add_parser("synth-dataset", help="synthesize and balance a labeled dataset")
    p.add_argument("--size", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--background-fraction", type=float, dest="background_fraction")
    _add_gen_flags(p)

    p = sub.add_parser("train", help="train the per-pixel segmenter")
    p.add_argument("--learning-rate", type=float, dest="learning_rate")
    p.add_argument("--iterations", type=int)
    p.add_argument("--batch-pixels", type=int, dest="batch_pixels")
    p.add_argument("--batch-patches", type=int, dest="batch_patches")
    p.add_argument("--hidden-width", type=int, dest="hidden_width")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("infer", help="segment one document image")
    p.add_argument("--model")
    p.add_argument("--input", required=True)
    p.add_argument("--overlap-factor", type=float, dest="overlap_factor")
    p.add_argument("--min-confidence", type=float, dest="min_confidence")
    p.add_argument("--min-contour-area", type=int, dest="min_contour_area")

    p = sub.add_parser("eval", help="compare prediction labels against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)

    p = sub.add_parser("grid-search", help="exhaustive post-processing parameter search")
    p.add_argument("--model")
    p.add_argument("--docs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--doc-height", type=int, dest="doc_height")
    p.add_argument("--doc-width", type=int, dest="doc_width")
    _add_gen_flags(p)

    p = sub.add_parser("e2e", help="run the whole pipeline with an oracle catalog")
    p.add_argument("--seed", type=int)
    p.add_argument("--patches", type=int)
    p.add_argument("--dataset-size", type=int, dest="dataset_size")
    p.add_argument("--train-iters", type=int, dest="train_iters")
    p.add_argument("--k", type=int)
    p.add_argument("--grid-docs", type=int, dest="grid_docs")
    p.add_argument("--eval-docs", type=int, dest="eval_docs")
    p.add_argument("--oracle-patches", type=int, dest="oracle_patches")
    p.add_argument("--pixel-budget", type=int, dest="pixel_budget")
    _add_gen_flags(p)

    return parser


_COMMANDS = {
    "gen-corpus": cmd_gen_corpus,
    "fit-clusters": cmd_fit_clusters,
    "annotate": cmd_annotate,
    "fuse-preview": cmd_fuse_preview,
    "synth-dataset": cmd_synth_dataset,
    "train": cmd_train,
    "infer": cmd_infer,
    "eval": cmd_eval,
    "grid-search": cmd_grid_search,
    "e2e": cmd_e2e,
}


def _error_line(code: int, message: str):
    print("ERROR " + json.dumps({"exit_code": code, "message": message}), file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    config = {}
    if args.config:
        try:
            config = _load_toml(args.config)
        except Exception as exc:
            _error_line(EXIT_USAGE, f"cannot read config: {exc}")
            return EXIT_USAGE
    run_dir = Path(args.run_dir or os.environ.get(RUN_DIR_ENV) or "run")
    run_dir.mkdir(parents=True, exist_ok=True)
    try:
        return _COMMANDS[args.command](args, config, run_dir)
    except ValidationFailure as exc:
        _error_line(EXIT_VALIDATION, str(exc))
        return EXIT_VALIDATION
    except ValueError as exc:
        _error_line(EXIT_VALIDATION, str(exc))
        return EXIT_VALIDATION
    except Exception as exc:
        _error_line(EXIT_RUNTIME, f"{type(exc).__name__}: {exc}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
