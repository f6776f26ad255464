"""Gradient predictions for the next round, built from past gradients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Zero:
    """No optimism; recovers plain adaptive FTRL."""

    def predict(self, history: Sequence[np.ndarray], n: int) -> np.ndarray:
        _check_history(history, n)
        return np.zeros(n)


@dataclass(frozen=True)
class LastGradient:
    """Martingale prediction: the next gradient equals the last one seen."""

    def predict(self, history: Sequence[np.ndarray], n: int) -> np.ndarray:
        _check_history(history, n)
        if len(history) == 0:
            return np.zeros(n)
        return np.array(history[-1], dtype=float)


@dataclass(frozen=True)
class HalfLipschitz:
    """Predict the midpoint ``L_i / 2`` of the per-coordinate range ``[0, L_i]``."""

    lipschitz: np.ndarray

    def __post_init__(self):
        lip = np.array(self.lipschitz, dtype=float).reshape(-1)
        if lip.size == 0 or np.any(lip <= 0) or not np.all(np.isfinite(lip)):
            raise ValueError("HalfLipschitz needs finite, strictly positive bounds")
        lip.setflags(write=False)
        object.__setattr__(self, "lipschitz", lip)

    def predict(self, history: Sequence[np.ndarray], n: int) -> np.ndarray:
        _check_history(history, n)
        if self.lipschitz.shape[0] != n:
            raise ValueError(f"expected {n} Lipschitz bounds, got {self.lipschitz.shape[0]}")
        return self.lipschitz / 2.0


PredictorKind = Zero | LastGradient | HalfLipschitz


def _check_history(history, n):
    # only the tail is checked: the engine appends one vector per round and a
    # full scan would make every round O(t)
    if len(history) and np.shape(history[-1]) != (n,):
        raise ValueError(f"gradient history has shape {np.shape(history[-1])}, expected ({n},)")


def predict(kind: PredictorKind, gradient_history: Sequence, n: int | None = None) -> np.ndarray:
    """Prediction of the next gradient from ``gradient_history``.

    ``n`` may be omitted when the history is non-empty or the kind carries
    its own dimension.
    """
    if n is None:
        if len(gradient_history):
            n = len(gradient_history[-1])
        elif isinstance(kind, HalfLipschitz):
            n = kind.lipschitz.shape[0]
        else:
            raise ValueError("dimension is unknown for an empty history")
    if len(gradient_history):
        dims = {np.shape(g) for g in gradient_history}
        if dims != {(n,)}:
            raise ValueError(f"gradient history dimensions {sorted(dims)} do not all equal ({n},)")
    return kind.predict(gradient_history, n)


def from_name(name: str, lipschitz=None) -> PredictorKind:
    key = name.lower().replace("-", "_")
    if key == "zero":
        return Zero()
    if key in ("last", "last_gradient", "lastgradient"):
        return LastGradient()
    if key in ("half_lipschitz", "halflipschitz"):
        if lipschitz is None:
            raise ValueError("half_lipschitz needs per-coordinate bounds")
        return HalfLipschitz(lipschitz)
    raise ValueError(f"unknown predictor {name!r}")
