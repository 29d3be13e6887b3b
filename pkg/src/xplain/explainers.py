"""Local additive explanation techniques: LIME, KernelSHAP and LPI.

All three share one entry point, explain(), which targets either the model's
log-odds or its class-1 probability. Each call's randomness derives solely
from its seed argument, so results are reproducible and schedule-independent.
One-hot groups are always perturbed atomically (per-column bit flips would
produce impossible encodings).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import DegenerateWeightsError, UnknownTechniqueError
from .models import ModelHandle, predict_logodds, predict_proba

LIME = "lime"
SHAP = "shap"
LPI = "lpi"
TECHNIQUES = (LIME, SHAP, LPI)

LOGODDS = "logodds"
PROBABILITY = "probability"
TARGET_SPACES = (LOGODDS, PROBABILITY)

# all 2^n coalitions are enumerated up to this dimension; sampling above it
EXACT_SHAP_LIMIT = 13

_RNG_TAG = {LIME: 1, SHAP: 2, LPI: 3}


@dataclass(frozen=True)
class LimeConfig:
    samples: int = 5000
    kernel_width: float | None = None  # None -> 0.75 * sqrt(n)
    ridge_strength: float = 1.0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("lime samples must be >= 1")
        if self.kernel_width is not None and self.kernel_width <= 0:
            raise ValueError("kernel_width must be positive")


@dataclass(frozen=True)
class ShapConfig:
    samples: int = 5000
    background_size: int = 100

    def __post_init__(self):
        if self.samples < 1 or self.background_size < 1:
            raise ValueError("shap samples and background_size must be >= 1")


@dataclass(frozen=True)
class LpiConfig:
    samples: int | None = None  # None -> training-set size
    absolute: bool = False

    def __post_init__(self):
        if self.samples is not None and self.samples < 1:
            raise ValueError("lpi samples must be >= 1")


@dataclass(frozen=True)
class ExplainerConfig:
    lime: LimeConfig = field(default_factory=LimeConfig)
    shap: ShapConfig = field(default_factory=ShapConfig)
    lpi: LpiConfig = field(default_factory=LpiConfig)


@dataclass(frozen=True)
class Explanation:
    """Per-feature importance vector for one instance and one technique."""

    phi: np.ndarray
    technique: str
    target_space: str
    sample_count: int
    seed: int
    base_value: float | None = None

    def top_k(self, k: int) -> list[tuple[int, float]]:
        """The k (index, value) pairs of largest absolute importance."""
        order = np.argsort(-np.abs(self.phi), kind="stable")[:k]
        return [(int(i), float(self.phi[i])) for i in order]

    def to_record(self, instance_index: int) -> dict:
        """JSON-serializable export record for one explained instance."""
        record = {
            "instance_index": instance_index,
            "technique": self.technique,
            "target_space": self.target_space,
            "phi": [float(v) for v in self.phi],
        }
        if self.base_value is not None:
            record["base_value"] = self.base_value
        return record


def _target_fn(model: ModelHandle, target_space: str):
    if target_space == LOGODDS:
        return lambda X: np.atleast_1d(predict_logodds(model, X))
    if target_space == PROBABILITY:
        return lambda X: np.atleast_1d(predict_proba(model, X))
    raise ValueError(f"unknown target space {target_space!r}")


def _slots(dataset: Dataset):
    """Feature positions in column order: numeric indices and whole groups."""
    slots: list[tuple[str, object]] = [("num", j) for j in dataset.numeric_indices]
    slots += [("group", g) for g in dataset.groups]
    slots.sort(key=lambda s: s[1] if s[0] == "num" else s[1].indices[0])
    return slots


def explain_lime(
    model: ModelHandle,
    x: np.ndarray,
    dataset: Dataset,
    config: ExplainerConfig | None = None,
    seed: int = 0,
    target_space: str = LOGODDS,
) -> Explanation:
    """Local ridge surrogate fitted to kernel-weighted perturbations.

    Numeric coordinates are resampled from Normal(x_j, train std);
    one-hot groups are resampled whole from the training category frequencies.
    Perturbations are weighted by exp(-d^2 / kernel_width^2) where d is the
    Euclidean distance over train-std-scaled numeric coordinates plus a
    mismatch indicator per categorical group. No discretization is applied,
    and all n coefficients are returned.
    """
    cfg = (config or ExplainerConfig()).lime
    x = np.asarray(x, dtype=float)
    n = dataset.n_features
    S = cfg.samples
    kernel_width = cfg.kernel_width if cfg.kernel_width is not None else 0.75 * math.sqrt(n)
    rng = np.random.default_rng([_RNG_TAG[LIME], seed])

    Z = np.tile(x, (S, 1))
    d2 = np.zeros(S)
    for kind, slot in _slots(dataset):
        if kind == "num":
            j = slot
            col = dataset.X_train[:, j]
            std = float(col.std(ddof=1)) if len(col) > 1 else 0.0
            Z[:, j] = rng.normal(x[j], std, S) if std > 0 else x[j]
            d2 += ((Z[:, j] - x[j]) / (std if std > 0 else 1.0)) ** 2
        else:
            idx = list(slot.indices)
            freqs = dataset.X_train[:, idx].mean(axis=0)
            freqs = freqs / freqs.sum()
            cats = rng.choice(len(idx), size=S, p=freqs)
            Z[:, idx] = 0.0
            Z[np.arange(S), np.asarray(idx)[cats]] = 1.0
            d2 += np.any(Z[:, idx] != x[idx], axis=1).astype(float)

    with np.errstate(divide="ignore"):
        weights = np.exp(-d2 / kernel_width**2)
    if np.max(weights) < 1e-30:
        raise DegenerateWeightsError("all perturbation weights are numerically zero")

    f = _target_fn(model, target_space)
    y = f(Z)

    # weighted ridge with unpenalized intercept
    A = np.column_stack([np.ones(S), Z])
    Aw = A * weights[:, None]
    gram = Aw.T @ A
    penal = np.eye(n + 1) * cfg.ridge_strength
    penal[0, 0] = 0.0
    beta = np.linalg.solve(gram + penal, Aw.T @ y)
    return Explanation(
        phi=beta[1:],
        technique=LIME,
        target_space=target_space,
        sample_count=S,
        seed=seed,
    )


def _shapley_kernel_weight(n: int, s: int) -> float:
    return (n - 1) / (math.comb(n, s) * s * (n - s))


def _coalition_values(f, masks: np.ndarray, x: np.ndarray, background: np.ndarray) -> np.ndarray:
    """v(S) = mean over background rows of f(x on S, background off S)."""
    B = background.shape[0]
    values = np.empty(len(masks))
    chunk = max(1, 262144 // max(B, 1))
    for start in range(0, len(masks), chunk):
        mk = masks[start : start + chunk]
        Z = np.where(mk[:, None, :], x, background[None, :, :])
        out = f(Z.reshape(-1, x.shape[0]))
        values[start : start + chunk] = out.reshape(len(mk), B).mean(axis=1)
    return values


def _solve_constrained_wls(
    masks: np.ndarray,
    values: np.ndarray,
    weights: np.ndarray,
    base: float,
    fx: float,
    n: int,
) -> np.ndarray:
    """Weighted least squares with phi_0 + sum(phi) = f(x) enforced by
    eliminating the last coefficient. Empty/full coalitions reduce to 0 = 0
    rows after the elimination, so only proper coalitions enter.
    """
    sizes = masks.sum(axis=1)
    keep = (sizes > 0) & (sizes < n)
    M = masks[keep].astype(float)
    wk = weights[keep]
    y = values[keep] - base - M[:, -1] * (fx - base)
    A = M[:, :-1] - M[:, -1:]
    Aw = A * wk[:, None]
    gram = Aw.T @ A
    rhs = Aw.T @ y
    try:
        beta = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        beta = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    return np.append(beta, (fx - base) - beta.sum())


def _sample_coalitions(n: int, samples: int, rng: np.random.Generator):
    """Coalitions drawn from the Shapley kernel size distribution, each paired
    with its complement; empty and full are always present. Duplicate draws
    accumulate as frequency weights."""
    sizes = np.arange(1, n)
    p = (n - 1) / (sizes * (n - sizes))
    p = p / p.sum()
    counts: dict[bytes, int] = {}
    order: list[bytes] = []

    def add(mask: np.ndarray):
        key = np.packbits(mask).tobytes()
        if key not in counts:
            counts[key] = 0
            order.append(key)
        counts[key] += 1

    empty = np.zeros(n, dtype=bool)
    add(empty)
    add(~empty)
    drawn = 2
    while drawn < samples:
        s = int(rng.choice(sizes, p=p))
        members = rng.choice(n, size=s, replace=False)
        mask = np.zeros(n, dtype=bool)
        mask[members] = True
        add(mask)
        add(~mask)
        drawn += 2
    masks = np.array(
        [np.unpackbits(np.frombuffer(k, dtype=np.uint8), count=n).astype(bool) for k in order]
    )
    weights = np.array([float(counts[k]) for k in order])
    return masks, weights


def explain_shap(
    model: ModelHandle,
    x: np.ndarray,
    dataset: Dataset,
    config: ExplainerConfig | None = None,
    seed: int = 0,
    target_space: str = LOGODDS,
) -> Explanation:
    """KernelSHAP against a seeded background sample of training rows.

    Coalition values marginalize off-coalition features with background rows.
    All 2^n coalitions are enumerated when n <= 13; above that, coalitions are
    sampled from the Shapley kernel. Attributions solve the kernel-weighted
    least squares with the local-accuracy constraint, and base_value is the
    background mean prediction.
    """
    cfg = (config or ExplainerConfig()).shap
    x = np.asarray(x, dtype=float)
    n = dataset.n_features
    if n < 1:
        raise ValueError("model must have at least one feature")
    m = dataset.X_train.shape[0]
    if m == 0:
        raise ValueError("empty background: training split has no rows")
    rng = np.random.default_rng([_RNG_TAG[SHAP], seed])
    if m > cfg.background_size:
        background = dataset.X_train[rng.choice(m, cfg.background_size, replace=False)]
    else:
        background = dataset.X_train

    f = _target_fn(model, target_space)
    base = float(f(background).mean())
    fx = float(f(x[None, :])[0])

    if n == 1:
        phi = np.array([fx - base])
        sample_count = 2
    elif n <= EXACT_SHAP_LIMIT:
        codes = np.arange(2**n, dtype=np.int64)
        masks = ((codes[:, None] >> np.arange(n)) & 1).astype(bool)
        sizes = masks.sum(axis=1)
        by_size = np.zeros(n + 1)
        for s in range(1, n):
            by_size[s] = _shapley_kernel_weight(n, s)
        weights = by_size[sizes]
        proper = (sizes > 0) & (sizes < n)
        values = np.empty(len(masks))
        values[proper] = _coalition_values(f, masks[proper], x, background)
        values[sizes == 0] = base
        values[sizes == n] = fx
        phi = _solve_constrained_wls(masks, values, weights, base, fx, n)
        sample_count = len(masks)
    else:
        masks, weights = _sample_coalitions(n, cfg.samples, rng)
        sizes = masks.sum(axis=1)
        proper = (sizes > 0) & (sizes < n)
        values = np.empty(len(masks))
        values[proper] = _coalition_values(f, masks[proper], x, background)
        values[sizes == 0] = base
        values[sizes == n] = fx
        phi = _solve_constrained_wls(masks, values, weights, base, fx, n)
        sample_count = int(weights.sum())

    return Explanation(
        phi=phi,
        technique=SHAP,
        target_space=target_space,
        sample_count=sample_count,
        seed=seed,
        base_value=base,
    )


def explain_lpi(
    model: ModelHandle,
    x: np.ndarray,
    dataset: Dataset,
    config: ExplainerConfig | None = None,
    seed: int = 0,
    target_space: str = LOGODDS,
) -> Explanation:
    """Local permutation importance in the chosen target space.

    For each feature, replacement values come from a shuffle of the training
    column (cycled when samples exceed the row count) and
    phi_j = mean_s [f(x) - f(x with coordinate j replaced)]. One-hot groups
    are permuted as whole groups and every column of a group shares the
    group's score. The absolute flag switches to mean |f(x) - f(...)|.
    """
    cfg = (config or ExplainerConfig()).lpi
    x = np.asarray(x, dtype=float)
    n = dataset.n_features
    m = dataset.X_train.shape[0]
    if m == 0:
        raise ValueError("training split has no rows")
    S = cfg.samples if cfg.samples is not None else m
    rng = np.random.default_rng([_RNG_TAG[LPI], seed])

    f = _target_fn(model, target_space)
    fx = float(f(x[None, :])[0])
    phi = np.zeros(n)

    def score(diffs: np.ndarray) -> float:
        return float(np.mean(np.abs(diffs) if cfg.absolute else diffs))

    for kind, slot in _slots(dataset):
        X_rep = np.tile(x, (S, 1))
        if kind == "num":
            j = slot
            shuffled = rng.permutation(dataset.X_train[:, j])
            X_rep[:, j] = shuffled[:S] if S <= m else np.resize(shuffled, S)
            phi[j] = score(fx - f(X_rep))
        else:
            idx = list(slot.indices)
            row_order = rng.permutation(m)
            rows = row_order[:S] if S <= m else np.resize(row_order, S)
            X_rep[:, idx] = dataset.X_train[np.asarray(rows)][:, idx]
            phi[idx] = score(fx - f(X_rep))

    return Explanation(
        phi=phi,
        technique=LPI,
        target_space=target_space,
        sample_count=S,
        seed=seed,
    )


_DISPATCH = {LIME: explain_lime, SHAP: explain_shap, LPI: explain_lpi}


def explain(
    technique: str,
    target_space: str,
    model: ModelHandle,
    x: np.ndarray,
    dataset: Dataset,
    config: ExplainerConfig | None = None,
    seed: int = 0,
) -> Explanation:
    """Dispatch to the requested technique with f = log-odds or probability."""
    if technique not in _DISPATCH:
        raise UnknownTechniqueError(
            f"unknown technique {technique!r}; expected one of {TECHNIQUES}"
        )
    if target_space not in TARGET_SPACES:
        raise ValueError(
            f"unknown target space {target_space!r}; expected one of {TARGET_SPACES}"
        )
    return _DISPATCH[technique](
        model, x, dataset, config=config, seed=seed, target_space=target_space
    )
