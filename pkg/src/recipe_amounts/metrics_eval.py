"""Set- and amount-level evaluation of predicted ingredient vectors.

Four per-recipe metrics: recall and IOU of the detected ingredient sets,
a range-aware L1 error, and the relative calorie error, all computed
after normalizing ground truth and prediction to a common total C.
An all-zero prediction skips its normalization: the L1 error then falls
out of the same formula and the calorie error is exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .vectorizer import RecipeVector


class EmptyGroundTruth(ValueError):
    pass


class ZeroGroundTruth(ValueError):
    pass


class ZeroGroundTruthCalories(ValueError):
    pass


class EmptyPool(ValueError):
    pass


class IdMismatch(ValueError):
    pass


class EmptyReport(ValueError):
    pass


@dataclass(frozen=True)
class CalorieDensities:
    """Per-ingredient energy density, kCal per gram."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or np.any(values < 0):
            raise ValueError("densities must be a nonnegative 1-D vector")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)


class MetricStat(NamedTuple):
    mean: float
    std: float


@dataclass(frozen=True)
class PerRecipeMetrics:
    recipe_id: str
    recall: float
    iou: float
    l1_error: float
    rce: float


@dataclass(frozen=True)
class MetricsReport:
    recall: MetricStat
    iou: MetricStat
    l1_error: MetricStat
    rce: MetricStat
    per_recipe: tuple[PerRecipeMetrics, ...]

    def to_dict(self) -> dict:
        return {
            "num_recipes": len(self.per_recipe),
            "metrics": {
                name: {"mean": stat.mean, "std": stat.std}
                for name, stat in (
                    ("recall", self.recall),
                    ("iou", self.iou),
                    ("l1_error", self.l1_error),
                    ("rce", self.rce),
                )
            },
            "per_recipe": [
                {
                    "id": r.recipe_id,
                    "recall": r.recall,
                    "iou": r.iou,
                    "l1_error": r.l1_error,
                    "rce": r.rce,
                }
                for r in self.per_recipe
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> MetricsReport:
        rows = tuple(
            PerRecipeMetrics(r["id"], r["recall"], r["iou"], r["l1_error"], r["rce"])
            for r in data["per_recipe"]
        )
        stats = {
            name: MetricStat(v["mean"], v["std"]) for name, v in data["metrics"].items()
        }
        return cls(stats["recall"], stats["iou"], stats["l1_error"], stats["rce"], rows)


def detect(v: np.ndarray) -> set[int]:
    """Indices with nonzero predicted amount count as detected."""
    return {int(i) for i in np.flatnonzero(np.asarray(v) > 0)}


def recall(gt_set: set[int], pred_set: set[int]) -> float:
    if not gt_set:
        raise EmptyGroundTruth("recall needs a nonempty ground-truth set")
    return len(gt_set & pred_set) / len(gt_set)


def iou(gt_set: set[int], pred_set: set[int]) -> float:
    union = gt_set | pred_set
    if not union:
        raise EmptyGroundTruth("iou needs a nonempty union")
    return len(gt_set & pred_set) / len(union)


def _normalized_pair(
    v_y: np.ndarray, v_r: np.ndarray | None, v_x: np.ndarray, C: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Scale ground truth (with ranges) and prediction to sum C.

    An all-zero prediction is left at zero, per the zero-prediction rule.
    """
    v_y = np.asarray(v_y, dtype=np.float64)
    v_x = np.asarray(v_x, dtype=np.float64)
    v_r = np.zeros_like(v_y) if v_r is None else np.asarray(v_r, dtype=np.float64)
    total_y = v_y.sum()
    if total_y <= 0:
        raise ZeroGroundTruth("ground-truth amounts sum to zero")
    scale_y = C / total_y
    total_x = v_x.sum()
    scale_x = C / total_x if total_x > 0 else 1.0
    return v_y * scale_y, v_r * scale_y, v_x * scale_x


def range_l1_error(
    v_y: np.ndarray,
    v_r: np.ndarray | None,
    v_x: np.ndarray,
    C: float = 1000.0,
    interval_distance: bool = False,
) -> float:
    """L1 error counted only where the prediction leaves the stated range.

    The range is a half-width interval around the amount.  Outside it the
    per-dimension error is the difference of the amounts themselves; with
    interval_distance=True it is the distance to the nearer interval edge
    instead (a plausible alternative reading, not the default).
    """
    ny, nr, nx = _normalized_pair(v_y, v_r, v_x, C)
    lo = ny - nr / 2
    hi = ny + nr / 2
    inside = (nx >= lo) & (nx <= hi)
    if interval_distance:
        errors = np.where(nx < lo, lo - nx, nx - hi)
    else:
        errors = np.abs(nx - ny)
    return float(np.where(inside, 0.0, errors).sum())


def relative_calorie_error(
    v_y: np.ndarray,
    v_x: np.ndarray,
    densities: CalorieDensities | np.ndarray,
    C: float = 1000.0,
) -> float:
    """|C_y - C_x| / C_y over calories of the normalized vectors."""
    c = densities.values if isinstance(densities, CalorieDensities) else np.asarray(densities)
    ny, _, nx = _normalized_pair(v_y, None, v_x, C)
    calories_y = float(c @ ny)
    if calories_y <= 0:
        raise ZeroGroundTruthCalories("ground-truth calories are zero")
    calories_x = float(c @ nx)
    return abs(calories_y - calories_x) / calories_y


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(u @ v) / (nu * nv)


def retrieve_nearest(
    query_feature: np.ndarray, pool: list[tuple[np.ndarray, RecipeVector]]
) -> RecipeVector:
    """Amount vector of the pool entry most cosine-similar to the query.

    Ties break toward the earliest pool index.  This is a feature-space
    stand-in for a learned cross-modal retrieval model.
    """
    if not pool:
        raise EmptyPool("retrieval pool is empty")
    query = np.asarray(query_feature, dtype=np.float64)
    best_idx = 0
    best_sim = -np.inf
    for i, (feature, _) in enumerate(pool):
        sim = cosine_similarity(query, np.asarray(feature, dtype=np.float64))
        if sim > best_sim:
            best_sim = sim
            best_idx = i
    return pool[best_idx][1]


def build_pool(
    entries: list[tuple[np.ndarray, RecipeVector]],
    gt_index: int,
    pool_size: int,
    include_gt: bool,
    rng: np.random.Generator,
) -> list[tuple[np.ndarray, RecipeVector]]:
    """Random candidate pool for one query.

    Draws pool_size candidates (or all available, if fewer): with
    include_gt the ground-truth entry takes one slot, without it the slot
    goes to another random candidate, so the two settings differ by one
    recipe.
    """
    others = [i for i in range(len(entries)) if i != gt_index]
    rng.shuffle(others)
    if include_gt:
        chosen = others[: pool_size - 1] + [gt_index]
    else:
        chosen = others[:pool_size]
    if not chosen:
        raise EmptyPool("no candidates available")
    return [entries[i] for i in sorted(chosen)]


def evaluate_pair(
    v_y: np.ndarray,
    v_r: np.ndarray | None,
    v_x: np.ndarray,
    densities: CalorieDensities | np.ndarray,
    C: float = 1000.0,
    interval_distance: bool = False,
) -> tuple[float, float, float, float]:
    """(recall, iou, range-aware L1, RCE) for one recipe."""
    gt_set = detect(v_y)
    pred_set = detect(v_x)
    return (
        recall(gt_set, pred_set),
        iou(gt_set, pred_set),
        range_l1_error(v_y, v_r, v_x, C, interval_distance),
        relative_calorie_error(v_y, v_x, densities, C),
    )


def _population_stat(values: list[float]) -> MetricStat:
    arr = np.asarray(values, dtype=np.float64)
    return MetricStat(float(arr.mean()), float(arr.std(ddof=0)))


def evaluate_dataset(
    predictions: Iterable[tuple[str, np.ndarray]],
    references: Iterable[tuple[str, np.ndarray, np.ndarray | None]],
    densities: CalorieDensities | np.ndarray,
    C: float = 1000.0,
    interval_distance: bool = False,
) -> MetricsReport:
    """Per-recipe metrics joined by id, with population mean/std per metric."""
    preds = dict(predictions)
    refs = {rid: (v_y, v_r) for rid, v_y, v_r in references}
    if len(preds) != len(refs) or set(preds) != set(refs):
        missing = sorted(set(preds) ^ set(refs))[:5]
        raise IdMismatch(f"prediction/reference ids differ, e.g. {missing}")
    rows = []
    for rid in sorted(refs):
        v_y, v_r = refs[rid]
        r, j, l1, rce = evaluate_pair(v_y, v_r, preds[rid], densities, C, interval_distance)
        rows.append(PerRecipeMetrics(rid, r, j, l1, rce))
    if not rows:
        raise EmptyReport("nothing to evaluate")
    return MetricsReport(
        recall=_population_stat([r.recall for r in rows]),
        iou=_population_stat([r.iou for r in rows]),
        l1_error=_population_stat([r.l1_error for r in rows]),
        rce=_population_stat([r.rce for r in rows]),
        per_recipe=tuple(rows),
    )


@dataclass(frozen=True)
class RceHistogram:
    """Log-spaced histogram of RCE values with a dedicated zero bucket."""

    zero_count: int
    edges: tuple[float, ...]
    counts: tuple[int, ...]
    fraction_below_one: float

    def total(self) -> int:
        return self.zero_count + sum(self.counts)

    def rows(self) -> list[tuple[float, float, int]]:
        out = [(0.0, 0.0, self.zero_count)]
        for i, count in enumerate(self.counts):
            out.append((self.edges[i], self.edges[i + 1], count))
        return out


def rce_histogram(report: MetricsReport, bins: int = 50) -> RceHistogram:
    """Counts per log10-spaced bin over the positive RCE values."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if not report.per_recipe:
        raise EmptyReport("report has no recipes")
    values = np.asarray([r.rce for r in report.per_recipe])
    below_one = float((values < 1.0).mean())
    positive = values[values > 0]
    zero_count = int((values == 0).sum())
    if positive.size == 0:
        return RceHistogram(zero_count, (), (), below_one)
    lo = np.log10(positive.min())
    hi = np.log10(positive.max())
    if hi - lo < 1e-12:
        edges = np.array([positive.min() * (1 - 1e-9), positive.max() * (1 + 1e-9)])
    else:
        edges = np.logspace(lo, hi, bins + 1)
    counts, edges = np.histogram(positive, bins=edges)
    return RceHistogram(
        zero_count=zero_count,
        edges=tuple(float(e) for e in edges),
        counts=tuple(int(c) for c in counts),
        fraction_below_one=below_one,
    )
