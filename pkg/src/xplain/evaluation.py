"""Per-instance rank correlation against ground truth, plus the aggregations.

One score per (instance, technique): Spearman correlation between the
explanation vector and the analytic attribution vector. Scores aggregate to a
per-dataset median and, across datasets, to per-technique average ranks
(rank 1 = highest median, lower average rank = better).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import DimensionMismatchError, VectorTooShortError
from .explainers import ExplainerConfig, explain
from .groundtruth import ground_truth
from .models import ModelHandle

SIGNIFICANT_CORRELATION = 0.7

# medians are rounded to this many digits before tie comparison so that rank
# ties are reproducible across platforms
MEDIAN_TIE_DIGITS = 12


@dataclass(frozen=True)
class CorrelationScore:
    r: float
    degenerate: bool = False
    instance_index: int | None = None
    technique: str | None = None


@dataclass(frozen=True)
class DatasetScoreSet:
    """All per-instance scores for one (dataset, model, technique) cell."""

    dataset_id: str
    model_kind: str
    technique: str
    scores: tuple[CorrelationScore, ...]
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    degenerate_count: int
    significant_count: int


@dataclass(frozen=True)
class RankTable:
    """Per-dataset technique ranks and their cross-dataset average / std."""

    techniques: tuple[str, ...]
    datasets: tuple[str, ...]
    per_dataset: dict[str, dict[str, float]]
    average: dict[str, float]
    std: dict[str, float]


def fractional_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties receiving the average of their positions."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(phi: np.ndarray, lam: np.ndarray, **meta) -> CorrelationScore:
    """Spearman rank correlation with fractional ranks for ties.

    A rank-constant vector on either side yields r = 0 with the degenerate
    flag set instead of a division by zero.
    """
    phi = np.asarray(phi, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if phi.shape != lam.shape:
        raise DimensionMismatchError(f"length mismatch: {phi.shape} vs {lam.shape}")
    if phi.ndim != 1 or len(phi) < 2:
        raise VectorTooShortError(f"need vectors of length >= 2, got {phi.shape}")
    ra = fractional_ranks(phi)
    rb = fractional_ranks(lam)
    da = ra - ra.mean()
    db = rb - rb.mean()
    va = float(da @ da)
    vb = float(db @ db)
    if va == 0.0 or vb == 0.0:
        return CorrelationScore(r=0.0, degenerate=True, **meta)
    r = float(da @ db) / float(np.sqrt(va * vb))
    return CorrelationScore(r=r, degenerate=False, **meta)


def derive_seed(seed: int, index: int) -> int:
    """Deterministic per-instance seed derived from (seed, index)."""
    return int(np.random.SeedSequence(entropy=[seed, index]).generate_state(1)[0])


def evaluate_instance(
    x: np.ndarray,
    model: ModelHandle,
    technique: str,
    target_space: str,
    dataset: Dataset,
    config: ExplainerConfig | None = None,
    seed: int = 0,
    instance_index: int | None = None,
) -> CorrelationScore:
    """Explain one instance, extract its ground truth, correlate the two."""
    gt = ground_truth(model, x)
    if technique == "groundtruth":
        phi = gt.lam
    else:
        phi = explain(technique, target_space, model, x, dataset, config, seed).phi
    return spearman(phi, gt.lam, instance_index=instance_index, technique=technique)


def summarize_scores(
    dataset_id: str,
    model_kind: str,
    technique: str,
    scores: list[CorrelationScore],
) -> DatasetScoreSet:
    """Median, quartiles (linear interpolation) and Tukey whiskers of the scores."""
    r = np.array([s.r for s in scores])
    q1, q3 = (float(np.percentile(r, q)) for q in (25, 75))
    iqr = q3 - q1
    inside = r[(r >= q1 - 1.5 * iqr) & (r <= q3 + 1.5 * iqr)]
    return DatasetScoreSet(
        dataset_id=dataset_id,
        model_kind=model_kind,
        technique=technique,
        scores=tuple(scores),
        median=float(np.median(r)),
        q1=q1,
        q3=q3,
        whisker_low=float(inside.min()),
        whisker_high=float(inside.max()),
        degenerate_count=sum(s.degenerate for s in scores),
        significant_count=int(np.sum(r > SIGNIFICANT_CORRELATION)),
    )


def evaluate_dataset(
    dataset: Dataset,
    model: ModelHandle,
    techniques: list[str],
    target_space: str,
    config: ExplainerConfig | None = None,
    seed: int = 0,
    workers: int = 1,
) -> list[DatasetScoreSet]:
    """Run every technique over every test instance; instance k uses the seed
    derived from (seed, k), so results do not depend on worker scheduling."""
    m = dataset.X_test.shape[0]
    if m == 0:
        raise ValueError(f"dataset {dataset.name!r} has an empty test split")
    instance_seeds = [derive_seed(seed, k) for k in range(m)]

    def one(args):
        technique, k = args
        return evaluate_instance(
            dataset.X_test[k],
            model,
            technique,
            target_space,
            dataset,
            config,
            seed=instance_seeds[k],
            instance_index=k,
        )

    out = []
    for technique in techniques:
        jobs = [(technique, k) for k in range(m)]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                scores = list(pool.map(one, jobs))
        else:
            scores = [one(j) for j in jobs]
        out.append(summarize_scores(dataset.name, model.kind, technique, scores))
    return out


def rank_techniques(score_sets: list[DatasetScoreSet]) -> RankTable:
    """Within each dataset rank techniques by median (1 = highest, exact median
    ties share the average position), then average ranks across datasets."""
    datasets: list[str] = []
    techniques: list[str] = []
    cells: dict[tuple[str, str], float] = {}
    for s in score_sets:
        if s.dataset_id not in datasets:
            datasets.append(s.dataset_id)
        if s.technique not in techniques:
            techniques.append(s.technique)
        cells[(s.dataset_id, s.technique)] = s.median
    for d in datasets:
        for t in techniques:
            if (d, t) not in cells:
                raise ValueError(f"missing score set for dataset {d!r}, technique {t!r}")

    per_dataset: dict[str, dict[str, float]] = {}
    for d in datasets:
        medians = np.array([round(cells[(d, t)], MEDIAN_TIE_DIGITS) for t in techniques])
        ranks = fractional_ranks(-medians)
        per_dataset[d] = {t: float(r) for t, r in zip(techniques, ranks)}

    average = {}
    std = {}
    for t in techniques:
        rs = np.array([per_dataset[d][t] for d in datasets])
        average[t] = float(rs.mean())
        std[t] = float(rs.std())
    return RankTable(
        techniques=tuple(techniques),
        datasets=tuple(datasets),
        per_dataset=per_dataset,
        average=average,
        std=std,
    )
