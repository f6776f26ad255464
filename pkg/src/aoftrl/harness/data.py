"""Synthetic ERM datasets and CSV ingestion.

CSV format: no header, one example per row, dense features followed by the
label in the last column (+1/-1 for logistic and hinge, real for lasso).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..domains import Hyperrectangle
from ..erm import ErmProblem
from ..regularizers import L1

LASSO_SUPPORT = 5


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray


def synthetic_classification(m: int, n: int, seed: int) -> Dataset:
    """Gaussian features, labels from a random hyperplane with 10% label noise."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    rng = np.random.default_rng([seed, 1])
    A = rng.standard_normal((m, n))
    w = rng.standard_normal(n) / np.sqrt(n)
    y = np.where(A @ w >= 0.0, 1.0, -1.0)
    flip = rng.random(m) < 0.1
    y[flip] = -y[flip]
    return Dataset(A, y)


def synthetic_regression(m: int, n: int, seed: int, support: int = LASSO_SUPPORT, noise: float = 0.1) -> Dataset:
    """Gaussian features and a sparse ground truth with entries of size 0.3..0.8."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    rng = np.random.default_rng([seed, 2])
    A = rng.standard_normal((m, n))
    w = np.zeros(n)
    idx = rng.choice(n, size=min(support, n), replace=False)
    w[idx] = rng.uniform(0.3, 0.8, idx.shape[0]) * rng.choice([-1.0, 1.0], idx.shape[0])
    b = A @ w + noise * rng.standard_normal(m)
    return Dataset(A, b)


def write_csv(path, data: Dataset) -> None:
    rows = np.column_stack([data.features, data.labels])
    np.savetxt(path, rows, delimiter=",", fmt="%.17g")


def read_csv(path) -> Dataset:
    raw = np.loadtxt(Path(path), delimiter=",", ndmin=2)
    if raw.shape[1] < 2:
        raise ValueError("each row needs at least one feature and a label")
    return Dataset(raw[:, :-1], raw[:, -1])


def problem_from_dataset(data: Dataset, loss: str, box: Hyperrectangle | None = None,
                         alpha: float = 0.0) -> ErmProblem:
    box = Hyperrectangle.cube(data.features.shape[1]) if box is None else box
    return ErmProblem(data.features, data.labels, loss, box, L1(alpha) if alpha > 0 else None)


def erm_problem_for(kind, domain=None) -> ErmProblem:
    """The ERM problem behind an ``ErmLogistic``/``ErmHinge``/``ErmLasso`` stream kind."""
    from .streams import ErmHinge, ErmLasso, ErmLogistic

    if domain is not None and not isinstance(domain, Hyperrectangle):
        raise TypeError("ERM problems live on a box")
    if domain is not None and domain.n != kind.n:
        raise ValueError(f"stream kind has n={kind.n}, domain has n={domain.n}")
    if isinstance(kind, ErmLasso):
        data = synthetic_regression(kind.m, kind.n, kind.data_seed)
        return problem_from_dataset(data, "squared", domain, kind.alpha)
    if isinstance(kind, (ErmLogistic, ErmHinge)):
        data = synthetic_classification(kind.m, kind.n, kind.data_seed)
        return problem_from_dataset(data, "logistic" if isinstance(kind, ErmLogistic) else "hinge", domain)
    raise TypeError(f"not an ERM stream kind: {kind!r}")
