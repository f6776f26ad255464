"""Adaptive optimistic FTRL: the update loop, closed-form steps, and regret bounds.

Each round observes ``g_t`` at ``x_t``, folds it into the adaptive
regularizer, predicts ``g~_{t+1}`` and plays

    x_{t+1} = argmin_{x in K}  (g_{1:t} + g~_{t+1}) . x + r_{0:t}(x) [+ psi_{1:t+1}(x)].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import oracle
from .domains import Hyperrectangle, Simplex, clean_simplex_point
from .predictors import LastGradient, PredictorKind
from .regularizers import AoegRegState, AogdRegState, L1, SquaredL2

BOUND_SLACK = 1e-9


class StreamError(RuntimeError):
    """The loss stream produced a non-finite value or gradient."""


@dataclass(frozen=True)
class AOGD:
    name = "aogd"


@dataclass(frozen=True)
class AOEG:
    C: float = 1.0
    name = "aoeg"


@dataclass(frozen=True)
class CAOGD_L1:
    alpha: float
    name = "caogd_l1"

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")


Algorithm = AOGD | AOEG | CAOGD_L1


@dataclass
class RoundRecord:
    t: int
    x: np.ndarray
    loss: float
    grad: np.ndarray
    prediction: np.ndarray
    dual_term: float
    composite: float = 0.0


@dataclass
class RegretReport:
    T: int
    algorithm: str
    trace: list
    comparator: np.ndarray
    regret: float
    regret_vs_center: float
    bounds: dict
    final_iterate: np.ndarray
    losses: list = field(repr=False, default_factory=list)
    cumulative_loss: float = 0.0
    extras: dict = field(default_factory=dict)
    r_total_at: Callable | None = field(repr=False, default=None)

    def holds(self, name: str, slack: float = BOUND_SLACK) -> bool:
        return self.regret <= self.bounds[name] + slack

    def regret_curve(self, comparator=None) -> np.ndarray:
        """Cumulative regret after each round against ``comparator`` (default: the report's)."""
        x_star = self.comparator if comparator is None else np.asarray(comparator, dtype=float)
        psi = self.extras.get("composite")
        out = np.empty(self.T)
        acc = 0.0
        for i, (rec, f) in enumerate(zip(self.trace, self.losses)):
            acc += rec.loss + rec.composite - f.value(x_star)
            if psi is not None:
                acc -= psi(x_star)
            out[i] = acc
        return out


# ---------------------------------------------------------------- closed forms

def aogd_step(state: AogdRegState, c, box: Hyperrectangle, prev=None) -> np.ndarray:
    """Per-coordinate minimizer of ``c.x + r_{0:t}(x)`` over the box.

    A coordinate without curvature (``A_i = 0``) goes to the vertex opposing
    ``c_i``; if ``c_i`` is also 0 the previous iterate's value is kept.
    """
    c = np.asarray(c, dtype=float)
    A, B, R = state.A, state.B, box.radii
    out = np.empty_like(c)
    pos = A > 0
    out[pos] = np.clip((2.0 * B[pos] - c[pos]) / (2.0 * A[pos]), -R[pos], R[pos])
    deg = ~pos
    if np.any(deg):
        keep = np.zeros_like(c) if prev is None else np.asarray(prev, dtype=float)
        out[deg] = np.where(c[deg] != 0.0, -R[deg] * np.sign(c[deg]), keep[deg])
    return out


def cao_l1_step(state: AogdRegState, c, w: float, box: Hyperrectangle, prev=None) -> np.ndarray:
    """Minimizer of ``c.x + r_{0:t}(x) + w ||x||_1`` over the box (soft threshold, then clip)."""
    if w < 0:
        raise ValueError("L1 weight must be non-negative")
    if w == 0:
        return aogd_step(state, c, box, prev)
    c = np.asarray(c, dtype=float)
    A, B, R = state.A, state.B, box.radii
    out = np.empty_like(c)
    pos = A > 0
    z = 2.0 * B[pos] - c[pos]
    st = np.sign(z) * np.maximum(np.abs(z) - w, 0.0)
    out[pos] = np.clip(st / (2.0 * A[pos]), -R[pos], R[pos])
    deg = ~pos
    if np.any(deg):
        cd = c[deg]
        out[deg] = np.where(np.abs(cd) > w, -R[deg] * np.sign(cd), 0.0)
    return out


def squared_l2_step(state: AogdRegState, c, w: float, box: Hyperrectangle, prev=None) -> np.ndarray:
    """Minimizer of ``c.x + r_{0:t}(x) + w ||x||_2^2`` over the box."""
    c = np.asarray(c, dtype=float)
    curv = state.A + w
    out = np.empty_like(c)
    pos = curv > 0
    out[pos] = np.clip((2.0 * state.B[pos] - c[pos]) / (2.0 * curv[pos]), -box.radii[pos], box.radii[pos])
    if not np.all(pos):
        prev_state = AogdRegState(state.radii, state.delta, state.A, state.B, state.Q)
        out[~pos] = aogd_step(prev_state, c, box, prev)[~pos]
    return out


def aoeg_step(state: AoegRegState | float, c) -> np.ndarray:
    """Entropic step ``x ∝ exp(-c / eta_t)`` on the simplex."""
    eta = state if isinstance(state, (int, float)) else state.eta()
    z = -np.asarray(c, dtype=float) / eta
    z -= np.max(z)
    w = np.exp(z)
    out = w / np.sum(w)
    return clean_simplex_point(out)


def composite_step(state: AogdRegState, c, composite, t_next: int, box: Hyperrectangle, prev=None):
    """Step with the cumulative composite ``t_next * psi``; ``None`` means no composite."""
    if composite is None:
        return aogd_step(state, c, box, prev)
    w = t_next * composite.alpha
    if isinstance(composite, L1):
        return cao_l1_step(state, c, w, box, prev)
    if isinstance(composite, SquaredL2):
        return squared_l2_step(state, c, w, box, prev)
    raise TypeError(f"unsupported composite term {composite!r}")


def numeric_step(state: AogdRegState, c, box: Hyperrectangle, l1_weight: float = 0.0, l2_weight: float = 0.0,
                 config: oracle.OracleConfig = oracle.OracleConfig()) -> np.ndarray:
    """Numeric minimizer of ``c.x + r_{0:t}(x) + l1_weight ||x||_1 + l2_weight ||x||^2`` over the box."""
    c = np.asarray(c, dtype=float)
    A, B = state.A, state.B

    def fg(x):
        v = float(np.dot(c, x) + np.sum(A * x * x - 2.0 * B * x))
        v += l1_weight * float(np.sum(np.abs(x))) + l2_weight * float(np.dot(x, x))
        g = c + 2.0 * A * x - 2.0 * B + l1_weight * np.sign(x) + 2.0 * l2_weight * x
        return v, g

    return oracle.numeric_argmin(fg, box, config).x


# ---------------------------------------------------------------- main loop

def _check_finite(value, grad, t):
    if not (math.isfinite(value) and np.all(np.isfinite(grad))):
        raise StreamError(f"non-finite loss or gradient at round {t}")


def run_online(stream, domain, predictor: PredictorKind = LastGradient(), algorithm: Algorithm = AOGD(),
               T: int = 100, *, keep_history: bool = False, find_comparator: bool = True,
               oracle_config: oracle.OracleConfig = oracle.OracleConfig()) -> RegretReport:
    """Run AO-GD, AO-EG or composite L1 AO-GD on ``stream`` for ``T`` rounds.

    ``stream.loss(t)`` must return the round-``t`` loss (1-based) with
    ``value``/``grad`` methods.
    """
    if T < 0:
        raise ValueError("T must be non-negative")
    if isinstance(algorithm, AOEG):
        if not isinstance(domain, Simplex):
            raise TypeError("AO-EG runs on the simplex")
        return _run_aoeg(stream, domain, predictor, algorithm, T, find_comparator, oracle_config)
    if not isinstance(domain, Hyperrectangle):
        raise TypeError(f"{algorithm.name} runs on a box")
    composite = L1(algorithm.alpha) if isinstance(algorithm, CAOGD_L1) else None
    return _run_aogd(stream, domain, predictor, composite, algorithm.name, T, keep_history,
                     find_comparator, oracle_config)


def _run_aogd(stream, box, predictor, composite, name, T, keep_history, find_comparator, oracle_config):
    n = box.n
    state = AogdRegState.fresh(box.radii, keep_history=keep_history)
    x = box.center()
    G = np.zeros(n)
    g_pred = np.zeros(n)
    history: list = []
    trace: list = []
    losses: list = []
    for t in range(1, T + 1):
        f = stream.loss(t)
        val = f.value(x)
        g = np.asarray(f.grad(x), dtype=float)
        _check_finite(val, g, t)
        psi_val = composite(x) if composite is not None else 0.0
        state.accumulate(x, g, g_pred)
        dual = state.dual_norm_sq(g - g_pred)
        trace.append(RoundRecord(t, x, val, g, g_pred, dual, psi_val))
        losses.append(f)
        history.append(g)
        G = G + g
        g_next = predictor.predict(history, n)
        x = composite_step(state, G + g_next, composite, t + 1, box, prev=x)
        g_pred = g_next
    report = _finish(trace, losses, box, composite, name, x, find_comparator, oracle_config)
    report.r_total_at = state.value
    report.extras["state"] = state
    if T:
        report.bounds["theorem1"] = theorem1_bound(trace, state.value, report.comparator)
        report.bounds["aogd"] = aogd_regret_bound([r.grad for r in trace], [r.prediction for r in trace], box.radii)
    else:
        report.bounds.update(theorem1=0.0, aogd=0.0)
    return report


def _run_aoeg(stream, simplex, predictor, algorithm, T, find_comparator, oracle_config):
    n = simplex.n
    state = AoegRegState(n, algorithm.C)
    x = simplex.center()
    G = np.zeros(n)
    g_pred = np.zeros(n)
    history: list = []
    trace: list = []
    losses: list = []
    S_prev = 0.0
    for t in range(1, T + 1):
        f = stream.loss(t)
        val = f.value(x)
        g = np.asarray(f.grad(x), dtype=float)
        _check_finite(val, g, t)
        # general (non-proximal) convention: dual norm of round t-1
        dual = state.dual_norm_sq(g - g_pred)
        S_prev = state.S
        state.accumulate(g, g_pred)
        trace.append(RoundRecord(t, x, val, g, g_pred, dual))
        losses.append(f)
        history.append(g)
        G = G + g
        g_next = predictor.predict(history, n)
        x = aoeg_step(state, G + g_next)
        g_pred = g_next
    report = _finish(trace, losses, simplex, None, algorithm.name, x, find_comparator, oracle_config)
    before_last = AoegRegState(n, algorithm.C, S_prev)
    report.r_total_at = before_last.value
    report.extras["state"] = state
    if T:
        report.bounds["theorem2"] = theorem1_bound(trace, before_last.value, report.comparator)
        report.bounds["aoeg"] = aoeg_regret_bound([r.grad for r in trace], [r.prediction for r in trace],
                                                  algorithm.C, n)
    else:
        report.bounds.update(theorem2=0.0, aoeg=0.0)
    return report


def _finish(trace, losses, domain, composite, name, x_final, find_comparator, oracle_config):
    T = len(trace)
    total = math.fsum([r.loss for r in trace] + [r.composite for r in trace])
    if T and find_comparator:
        x_star = oracle.best_fixed_point(losses, domain, composite, T, oracle_config).x
    else:
        x_star = domain.center()
    regret = total - cumulative_loss_at(losses, x_star, composite)
    vs_center = total - cumulative_loss_at(losses, domain.center(), composite)
    report = RegretReport(T, name, trace, x_star, regret, vs_center, {}, x_final, losses, total)
    report.extras["composite"] = composite
    return report


def cumulative_loss_at(losses: Sequence, x, composite=None) -> float:
    if not losses:
        return 0.0
    from .losses import aggregate
    total = aggregate(losses).value(x)
    if composite is not None:
        total += len(losses) * composite(x)
    return float(total)


# ---------------------------------------------------------------- bounds

def theorem1_bound(trace: Sequence[RoundRecord], r_total_at: Callable, x_star) -> float:
    """``r_{0:T}(x*) + sum_t ||g_t - g~_t||^2_{(t),*}`` from a recorded run."""
    return float(r_total_at(np.asarray(x_star, dtype=float)) + sum(r.dual_term for r in trace))


def aogd_regret_bound(gradients: Sequence, predictions: Sequence, radii) -> float:
    """``4 sum_i R_i sqrt(sum_t (g_{t,i} - g~_{t,i})^2)``."""
    if len(gradients) != len(predictions):
        raise ValueError("gradients and predictions differ in length")
    radii = np.asarray(radii, dtype=float)
    if len(gradients) == 0:
        return 0.0
    diff = np.asarray(gradients, dtype=float) - np.asarray(predictions, dtype=float)
    return float(4.0 * np.sum(radii * np.sqrt(np.sum(diff * diff, axis=0))))


def aoeg_regret_bound(gradients: Sequence, predictions: Sequence, C: float, n: int) -> float:
    """``2 sqrt(2 log n (C + sum_{t<T} ||g_t - g~_t||_inf^2))``."""
    if not C > 0:
        raise ValueError("C must be positive")
    if len(gradients) != len(predictions):
        raise ValueError("gradients and predictions differ in length")
    s = 0.0
    if len(gradients) > 1:
        diff = np.asarray(gradients[:-1], dtype=float) - np.asarray(predictions[:-1], dtype=float)
        s = float(np.sum(np.max(np.abs(diff), axis=1) ** 2))
    return float(2.0 * np.sqrt(2.0 * np.log(n) * (C + s)))


def posteriori_optimal_value(column_norms) -> float:
    """``inf_{s >= 0, <s,1> <= n} sum_i c_i^2 / s_i = (sum_i c_i)^2 / n``."""
    c = np.asarray(column_norms, dtype=float)
    if np.any(c < 0):
        raise ValueError("column norms must be non-negative")
    if c.size == 0:
        return 0.0
    return float(np.sum(c) ** 2 / c.shape[0])


def posteriori_bound(column_norms) -> float:
    """``sqrt(n * inf) = sum_i c_i``, the a-posteriori optimal regret scale."""
    c = np.asarray(column_norms, dtype=float)
    return float(np.sqrt(c.shape[0] * posteriori_optimal_value(c))) if c.size else 0.0
