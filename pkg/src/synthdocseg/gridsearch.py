"""Exhaustive grid search over the post-processing hyperparameters.

Predictions per overlap factor are computed once and every
(min_confidence, min_contour_area) combination is applied to the cached
confidence maps; the objective is dataset-level mIoU.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .inference import PostprocessParams, postprocess, predict_document
from .metrics import confusion, report
from .segmenter import SegModel

DEFAULT_OVERLAPS = (0.0, 0.5)
DEFAULT_CONFIDENCES = (0.3, 0.7, 0.9)
DEFAULT_AREAS = (15, 30, 55)


@dataclass(frozen=True)
class Grid:
    overlap_factors: tuple = DEFAULT_OVERLAPS
    min_confidences: tuple = DEFAULT_CONFIDENCES
    min_contour_areas: tuple = DEFAULT_AREAS

    def points(self):
        for o in self.overlap_factors:
            for c in self.min_confidences:
                for a in self.min_contour_areas:
                    yield PostprocessParams(o, c, a)


@dataclass
class GridResult:
    best: PostprocessParams
    rows: list[dict] = field(default_factory=list)


def grid_search(model: SegModel, eval_set, grid: Grid = Grid()) -> GridResult:
    """Evaluate every grid point; eval_set is a list of (document, truth)."""
    if not eval_set:
        raise ValueError("evaluation set is empty")
    if not (grid.overlap_factors and grid.min_confidences and grid.min_contour_areas):
        raise ValueError("grid is empty")

    rows = []
    for overlap in grid.overlap_factors:
        confs = [predict_document(model, doc, overlap) for doc, _ in eval_set]
        for min_conf in grid.min_confidences:
            for area in grid.min_contour_areas:
                counts = np.zeros((3, 3), dtype=np.int64)
                for conf, (_, truth) in zip(confs, eval_set):
                    pred = postprocess(conf, min_conf, area)
                    counts += confusion(pred, truth)
                rep = report(counts)
                rows.append(
                    {
                        "overlap_factor": overlap,
                        "min_confidence": min_conf,
                        "min_contour_area": area,
                        "miou": rep.miou,
                        "iou": list(rep.iou),
                        "precision": list(rep.precision),
                        "recall": list(rep.recall),
                    }
                )

    # argmax mIoU, ties broken lexicographically ascending on the parameters
    best_row = max(
        rows,
        key=lambda r: (
            r["miou"],
            -r["overlap_factor"],
            -r["min_confidence"],
            -r["min_contour_area"],
        ),
    )
    best = PostprocessParams(
        best_row["overlap_factor"], best_row["min_confidence"], best_row["min_contour_area"]
    )
    return GridResult(best=best, rows=rows)


def result_to_json(result: GridResult) -> str:
    return json.dumps(
        {
            "best": {
                "overlap_factor": result.best.overlap_factor,
                "min_confidence": result.best.min_confidence,
                "min_contour_area": result.best.min_contour_area,
            },
            "rows": result.rows,
        },
        sort_keys=True,
        indent=2,
    )


def result_to_table(result: GridResult) -> str:
    lines = [f"{'overlap':>8} {'min_conf':>9} {'min_area':>9} {'mIoU':>7}"]
    for r in result.rows:
        mark = " *" if (
            r["overlap_factor"] == result.best.overlap_factor
            and r["min_confidence"] == result.best.min_confidence
            and r["min_contour_area"] == result.best.min_contour_area
        ) else ""
        lines.append(
            f"{r['overlap_factor']:>8.2f} {r['min_confidence']:>9.2f} "
            f"{r['min_contour_area']:>9d} {r['miou']:>7.4f}{mark}"
        )
    return "\n".join(lines)
