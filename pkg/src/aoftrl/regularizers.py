"""Adaptive regularizers and composite penalties.

The per-coordinate proximal quadratic is stored through three running sums
per coordinate,

    A_i = sum_s a_{s,i},   B_i = sum_s a_{s,i} x_{s,i},   Q_i = sum_s a_{s,i} x_{s,i}^2,

with increments ``a_{s,i} = (Delta_{s,i} - Delta_{s-1,i}) / (2 R_i)``, so that

    r_{0:t}(x) = sum_i A_i x_i^2 - 2 B_i x_i + Q_i = sum_i sum_s a_{s,i} (x_i - x_{s,i})^2

is available in O(n) memory.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class UndefinedDualNorm(ArithmeticError):
    """A nonzero vector was measured in a coordinate with no accumulated curvature."""


@dataclass
class AogdRegState:
    radii: np.ndarray
    delta: np.ndarray = None
    A: np.ndarray = None
    B: np.ndarray = None
    Q: np.ndarray = None
    keep_history: bool = False
    history: list = field(default_factory=list)

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        n = self.radii.shape[0]
        for name in ("delta", "A", "B", "Q"):
            if getattr(self, name) is None:
                setattr(self, name, np.zeros(n))
            else:
                setattr(self, name, np.array(getattr(self, name), dtype=float))

    @classmethod
    def fresh(cls, radii, keep_history: bool = False) -> "AogdRegState":
        return cls(np.asarray(radii, dtype=float), keep_history=keep_history)

    @property
    def n(self) -> int:
        return self.radii.shape[0]

    def copy(self) -> "AogdRegState":
        return AogdRegState(
            self.radii, self.delta.copy(), self.A.copy(), self.B.copy(), self.Q.copy(),
            self.keep_history, list(self.history),
        )

    def accumulate(self, x_t, g_t, g_pred) -> np.ndarray:
        """Fold round ``t`` into the regularizer in place; returns the increments ``a_t``."""
        x_t, g_t, g_pred = (np.asarray(v, dtype=float) for v in (x_t, g_t, g_pred))
        n = self.n
        if x_t.shape != (n,) or g_t.shape != (n,) or g_pred.shape != (n,):
            raise ValueError(f"dimension mismatch: expected ({n},) vectors")
        diff = g_t - g_pred
        new_delta = np.sqrt(self.delta * self.delta + diff * diff)
        a = (new_delta - self.delta) / (2.0 * self.radii)
        # sqrt rounding can never legitimately shrink Delta
        a = np.maximum(a, 0.0)
        self.A += a
        ax = a * x_t
        self.B += ax
        self.Q += ax * x_t
        self.delta = np.maximum(new_delta, self.delta)
        if self.keep_history:
            self.history.append((x_t.copy(), a.copy()))
        return a

    def value(self, x) -> float:
        """``r_{0:t}(x)`` from the running sums."""
        x = np.asarray(x, dtype=float)
        return float(np.sum(self.A * x * x - 2.0 * self.B * x + self.Q))

    def value_from_history(self, x) -> float:
        """``r_{0:t}(x)`` summed term by term over the retained history."""
        if not self.keep_history:
            raise RuntimeError("state was created without keep_history=True")
        x = np.asarray(x, dtype=float)
        total = 0.0
        for x_s, a_s in self.history:
            total += float(np.sum(a_s * (x - x_s) ** 2))
        return total

    def dual_norm_sq(self, v) -> float:
        return aogd_dual_norm_sq(self, v)


def aogd_accumulate(state: AogdRegState, x_t, g_t, g_pred) -> AogdRegState:
    """Functional form of :meth:`AogdRegState.accumulate` (the input is not modified)."""
    out = state.copy()
    out.accumulate(x_t, g_t, g_pred)
    return out


def aogd_dual_norm_sq(state: AogdRegState, v) -> float:
    """``sum_i R_i v_i^2 / Delta_i``; coordinates with ``v_i = 0`` contribute 0."""
    v = np.asarray(v, dtype=float)
    if v.shape != (state.n,):
        raise ValueError(f"expected shape ({state.n},), got {v.shape}")
    nz = v != 0.0
    if np.any(state.delta[nz] == 0.0):
        raise UndefinedDualNorm("nonzero component where Delta is 0")
    return float(np.sum(state.radii[nz] * v[nz] ** 2 / state.delta[nz]))


@dataclass
class AoegRegState:
    """Scaled negative entropy ``eta_t (phi + log n)`` on the simplex."""

    n: int
    C: float
    S: float = 0.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("the entropic regularizer needs n >= 2")
        if not self.C > 0:
            raise ValueError("C must be positive")

    def eta(self) -> float:
        return aoeg_eta(self)

    def accumulate(self, g_t, g_pred) -> float:
        d = float(np.max(np.abs(np.asarray(g_t, dtype=float) - np.asarray(g_pred, dtype=float))))
        self.S += d * d
        return d * d

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        pos = x > 0
        phi = float(np.sum(x[pos] * np.log(x[pos])))
        return self.eta() * (phi + np.log(self.n))

    def dual_norm_sq(self, v) -> float:
        """Dual of the l1 norm scaled by the entropy's strong-convexity modulus."""
        m = float(np.max(np.abs(v)))
        return m * m / self.eta()

    def copy(self) -> "AoegRegState":
        return AoegRegState(self.n, self.C, self.S)


def aoeg_eta(state: AoegRegState) -> float:
    return float(np.sqrt(2.0 * (state.C + state.S) / np.log(state.n)))


@dataclass(frozen=True)
class NoComposite:
    def __call__(self, x) -> float:
        return 0.0

    def subgradient(self, x) -> np.ndarray:
        return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class L1:
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    def __call__(self, x) -> float:
        return self.alpha * float(np.sum(np.abs(x)))

    def subgradient(self, x) -> np.ndarray:
        return self.alpha * np.sign(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class SquaredL2:
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return self.alpha * float(np.dot(x, x))

    def subgradient(self, x) -> np.ndarray:
        return 2.0 * self.alpha * np.asarray(x, dtype=float)


CompositeTerm = NoComposite | L1 | SquaredL2


def composite_eval(term: CompositeTerm | None, x) -> float:
    if term is None:
        return 0.0
    return term(x)
