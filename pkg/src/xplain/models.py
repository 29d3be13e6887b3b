"""Logistic regression (proximal gradient, random L1/L2 search) and Gaussian naive Bayes.

Both models expose class-1 probability and log-odds prediction. The log-odds
path is computed directly from the model parameters, never through the clipped
probability, so the additive ground-truth decomposition stays exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import PreprocessSpec, stratified_indices
from .errors import ConvergenceError, DimensionMismatchError

LOGISTIC = "lr"
GAUSSIAN_NB = "gnb"

PROBA_CLIP = 1e-12


@dataclass(frozen=True)
class LogisticModel:
    weights: np.ndarray
    intercept: float
    penalty: str  # "l1" | "l2"
    strength: float
    iterations: int = 0
    final_objective: float = float("nan")
    # objective recorded every 100th iteration plus at convergence
    objective_checkpoints: tuple[float, ...] = ()
    converged: bool = True


@dataclass(frozen=True)
class GaussianNBModel:
    mean0: np.ndarray
    mean1: np.ndarray
    var0: np.ndarray
    var1: np.ndarray
    prior0: float
    prior1: float


@dataclass(frozen=True)
class ModelHandle:
    """Tagged union of the two model families plus the preprocessing it was trained under."""

    kind: str
    model: LogisticModel | GaussianNBModel
    preprocess: PreprocessSpec | None = None

    @property
    def n_features(self) -> int:
        if self.kind == LOGISTIC:
            return len(self.model.weights)
        return len(self.model.mean0)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _nll(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray) -> float:
    z = X @ w + b
    s = np.where(y == 1, z, -z)
    return float(np.sum(np.logaddexp(0.0, -s)))


def _smooth_value(w, b, X, y, penalty, strength):
    val = _nll(w, b, X, y)
    if penalty == "l2":
        val += 0.5 * strength * float(w @ w)
    return val


def _smooth_grad(w, b, X, y, penalty, strength):
    z = X @ w + b
    r = _sigmoid(z) - y
    gw = X.T @ r
    gb = float(np.sum(r))
    if penalty == "l2":
        gw = gw + strength * w
    return gw, gb


def _soft_threshold(u: np.ndarray, t: float) -> np.ndarray:
    return np.sign(u) * np.maximum(np.abs(u) - t, 0.0)


def fit_logistic(
    X: np.ndarray,
    y: np.ndarray,
    penalty: str = "l2",
    strength: float = 0.0,
    tol: float = 1e-8,
    max_iter: int = 10000,
) -> LogisticModel:
    """Minimize negative log-likelihood + strength * penalty by proximal gradient.

    The smooth part carries the summed NLL (plus the L2 term); the L1 term
    enters through the soft-threshold prox. Backtracking line search halves
    the step until the quadratic upper bound holds, which makes the full
    objective non-increasing across iterations. The intercept is never
    penalized.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    m, n = X.shape
    w = np.zeros(n)
    b = 0.0
    l1 = strength if penalty == "l1" else 0.0

    def objective(wv, bv):
        return _smooth_value(wv, bv, X, y, penalty, strength) + l1 * float(
            np.sum(np.abs(wv))
        )

    obj = objective(w, b)
    checkpoints = [obj]
    step = 1.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        g_val = _smooth_value(w, b, X, y, penalty, strength)
        gw, gb = _smooth_grad(w, b, X, y, penalty, strength)
        step = min(step * 2.0, 1e6)
        while True:
            w_new = w - step * gw
            if l1 > 0.0:
                w_new = _soft_threshold(w_new, step * l1)
            b_new = b - step * gb
            dw = w_new - w
            db = b_new - b
            bound = (
                g_val
                + float(gw @ dw)
                + gb * db
                + (float(dw @ dw) + db * db) / (2.0 * step)
            )
            if _smooth_value(w_new, b_new, X, y, penalty, strength) <= bound + 1e-15:
                break
            step *= 0.5
            if step < 1e-12:
                break
        w, b = w_new, b_new
        new_obj = objective(w, b)
        if it % 100 == 0:
            checkpoints.append(new_obj)
        if abs(obj - new_obj) < tol:
            obj = new_obj
            converged = True
            break
        obj = new_obj
    checkpoints.append(obj)
    return LogisticModel(
        weights=w,
        intercept=float(b),
        penalty=penalty,
        strength=float(strength),
        iterations=it,
        final_objective=obj,
        objective_checkpoints=tuple(checkpoints),
        converged=converged,
    )


def train_logistic(
    X: np.ndarray,
    y: np.ndarray,
    search_trials: int = 100,
    seed: int = 0,
    tol: float = 1e-8,
    max_iter: int = 10000,
) -> LogisticModel:
    """Random hyperparameter search over L1/L2 penalty with strength ~ U(0, 4).

    Each trial draws its penalty and strength from an rng derived from
    (seed, trial), fits on an inner 80% of the training split and is scored by
    accuracy on the held-out 20%. The best converged trial (first wins ties)
    is refit on the full training split.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    inner_rng = np.random.default_rng([seed, 0])
    fit_idx, val_idx = stratified_indices(y, 0.2, inner_rng)
    X_fit, y_fit = X[fit_idx], y[fit_idx]
    X_val, y_val = X[val_idx], y[val_idx]

    best = None  # (accuracy, trial_index, penalty, strength)
    for t in range(search_trials):
        rng = np.random.default_rng([seed, t + 1])
        penalty = "l1" if rng.integers(2) == 0 else "l2"
        strength = float(rng.uniform(0.0, 4.0))
        model = fit_logistic(X_fit, y_fit, penalty, strength, tol, max_iter)
        if not model.converged:
            continue
        z = X_val @ model.weights + model.intercept
        acc = float(np.mean((z >= 0.0) == (y_val == 1)))
        if best is None or acc > best[0]:
            best = (acc, t, penalty, strength)
    if best is None:
        raise ConvergenceError(
            f"no trial converged within {max_iter} iterations ({search_trials} trials)"
        )
    return fit_logistic(X, y, best[2], best[3], tol, max_iter)


def train_gnb(X: np.ndarray, y: np.ndarray) -> GaussianNBModel:
    """Per-class per-feature Gaussian fit with empirical class priors.

    Variances are floored at 1e-9 times the largest total feature variance so
    constant columns (one-hot indicators in a pure class) stay usable.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    m0 = X[y == 0]
    m1 = X[y == 1]
    if len(m0) == 0 or len(m1) == 0:
        raise ValueError("both classes must appear in the training split")
    total_var = X.var(axis=0)
    floor = 1e-9 * float(total_var.max()) if total_var.max() > 0 else 1e-9
    return GaussianNBModel(
        mean0=m0.mean(axis=0),
        mean1=m1.mean(axis=0),
        var0=np.maximum(m0.var(axis=0), floor),
        var1=np.maximum(m1.var(axis=0), floor),
        prior0=len(m0) / len(y),
        prior1=len(m1) / len(y),
    )


def _check_input(x: np.ndarray, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim not in (1, 2) or x.shape[-1] != n:
        raise DimensionMismatchError(
            f"input has shape {x.shape}, model expects {n} features"
        )
    if not np.all(np.isfinite(x)):
        raise ValueError("input contains non-finite values")
    return x


def log_density_ratio(model: GaussianNBModel, x: np.ndarray) -> np.ndarray:
    """Per-feature log N(x | class 1) - log N(x | class 0), computed in log space."""

    def logpdf(t, mu, var):
        return -0.5 * (np.log(2.0 * np.pi * var) + (t - mu) ** 2 / var)

    return logpdf(x, model.mean1, model.var1) - logpdf(x, model.mean0, model.var0)


def prior_logodds(model: GaussianNBModel) -> float:
    return float(np.log(model.prior1) - np.log(model.prior0))


def _resolve(model) -> tuple[str, LogisticModel | GaussianNBModel]:
    if isinstance(model, ModelHandle):
        return model.kind, model.model
    if isinstance(model, LogisticModel):
        return LOGISTIC, model
    if isinstance(model, GaussianNBModel):
        return GAUSSIAN_NB, model
    raise TypeError(f"not a model: {type(model).__name__}")


def predict_logodds(model, x) -> float | np.ndarray:
    """Class-1 log-odds, computed directly from the model parameters.

    Accepts a single instance (n,) or a batch (m, n); returns a float for a
    single instance.
    """
    kind, inner = _resolve(model)
    if kind == LOGISTIC:
        x = _check_input(x, len(inner.weights))
        out = np.sum(inner.weights * x, axis=-1) + inner.intercept
    else:
        x = _check_input(x, len(inner.mean0))
        out = prior_logodds(inner) + np.sum(log_density_ratio(inner, x), axis=-1)
    return float(out) if x.ndim == 1 else out


def predict_proba(model, x) -> float | np.ndarray:
    """Class-1 probability, clipped to [1e-12, 1 - 1e-12].

    The Gaussian NB path goes through log-space joint likelihoods with
    log-sum-exp normalization rather than the log-odds shortcut.
    """
    kind, inner = _resolve(model)
    if kind == LOGISTIC:
        x = _check_input(x, len(inner.weights))
        p = _sigmoid(np.sum(inner.weights * x, axis=-1) + inner.intercept)
    else:
        x = _check_input(x, len(inner.mean0))

        def logpdf(t, mu, var):
            return -0.5 * (np.log(2.0 * np.pi * var) + (t - mu) ** 2 / var)

        l1 = np.log(inner.prior1) + np.sum(logpdf(x, inner.mean1, inner.var1), axis=-1)
        l0 = np.log(inner.prior0) + np.sum(logpdf(x, inner.mean0, inner.var0), axis=-1)
        p = np.exp(l1 - np.logaddexp(l0, l1))
    p = np.clip(p, PROBA_CLIP, 1.0 - PROBA_CLIP)
    return float(p) if x.ndim == 1 else p


def accuracy(model, X: np.ndarray, y: np.ndarray) -> float:
    """Fraction of instances whose log-odds sign matches the label."""
    z = predict_logodds(model, np.asarray(X, dtype=float))
    return float(np.mean((np.asarray(z) >= 0.0) == (np.asarray(y) == 1)))


def handle_to_dict(handle: ModelHandle) -> dict:
    """JSON-serializable form of a trained model plus its preprocessing."""
    out: dict = {"kind": handle.kind}
    if handle.kind == LOGISTIC:
        m = handle.model
        out["model"] = {
            "weights": [float(v) for v in m.weights],
            "intercept": m.intercept,
            "penalty": m.penalty,
            "strength": m.strength,
            "iterations": m.iterations,
            "final_objective": m.final_objective,
        }
    else:
        m = handle.model
        out["model"] = {
            "mean0": [float(v) for v in m.mean0],
            "mean1": [float(v) for v in m.mean1],
            "var0": [float(v) for v in m.var0],
            "var1": [float(v) for v in m.var1],
            "prior0": m.prior0,
            "prior1": m.prior1,
        }
    if handle.preprocess is not None:
        out["preprocess"] = handle.preprocess.to_dict()
    return out


def handle_from_dict(raw: dict) -> ModelHandle:
    kind = raw["kind"]
    inner = raw["model"]
    if kind == LOGISTIC:
        model = LogisticModel(
            weights=np.asarray(inner["weights"], dtype=float),
            intercept=float(inner["intercept"]),
            penalty=inner["penalty"],
            strength=float(inner["strength"]),
            iterations=int(inner.get("iterations", 0)),
            final_objective=float(inner.get("final_objective", float("nan"))),
        )
    elif kind == GAUSSIAN_NB:
        model = GaussianNBModel(
            mean0=np.asarray(inner["mean0"], dtype=float),
            mean1=np.asarray(inner["mean1"], dtype=float),
            var0=np.asarray(inner["var0"], dtype=float),
            var1=np.asarray(inner["var1"], dtype=float),
            prior0=float(inner["prior0"]),
            prior1=float(inner["prior1"]),
        )
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    spec = raw.get("preprocess")
    return ModelHandle(
        kind=kind,
        model=model,
        preprocess=None if spec is None else PreprocessSpec.from_dict(spec),
    )
