"""Shared helpers for building small datasets and models in tests."""

from pathlib import Path

import numpy as np
import pytest

from xplain.data import ColumnSpec, Dataset
from xplain.models import LogisticModel, ModelHandle

DATASETS_DIR = Path(__file__).resolve().parents[1] / "src" / "xplain" / "datasets"

BUNDLED = ["banking", "banknote", "haberman", "hr", "iris_binary", "pima"]


def numeric_dataset(X_train, X_test=None, y_train=None, y_test=None, name="test"):
    """Wrap plain matrices into a numeric-only Dataset."""
    X_train = np.asarray(X_train, dtype=float)
    if X_test is None:
        X_test = X_train[: max(1, len(X_train) // 4)]
    X_test = np.asarray(X_test, dtype=float)
    n = X_train.shape[1]
    if y_train is None:
        y_train = np.zeros(len(X_train), dtype=int)
        y_train[: len(y_train) // 2] = 1
    if y_test is None:
        y_test = np.zeros(len(X_test), dtype=int)
        y_test[: len(y_test) // 2] = 1
    return Dataset(
        columns=tuple(ColumnSpec(f"f{i}", "numeric") for i in range(n)),
        feature_names=tuple(f"f{i}" for i in range(n)),
        X_train=X_train,
        X_test=X_test,
        y_train=np.asarray(y_train),
        y_test=np.asarray(y_test),
        seed=0,
        numeric_indices=tuple(range(n)),
        name=name,
    )


def linear_handle(weights, intercept=0.0) -> ModelHandle:
    model = LogisticModel(
        weights=np.asarray(weights, dtype=float),
        intercept=float(intercept),
        penalty="l2",
        strength=0.0,
    )
    return ModelHandle(kind="lr", model=model)


def write_csv(path: Path, header: str, lines: list[str]):
    path.write_text("\n".join([header, *lines]) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def csv_dir(tmp_path):
    return tmp_path
