"""Epoch-based stochastic solver for regularized empirical risk minimization.

The objective is ``H(x) = sum_j f_j(x) + alpha psi(x)`` on a box. Every round
the solver sees one importance-weighted component gradient; at the start of
each epoch it snapshots all component gradients and uses the snapshot of the
component drawn for the next round as its optimistic prediction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import oracle
from .domains import Hyperrectangle
from .engine import RegretReport, RoundRecord, StreamError, composite_step
from .regularizers import AogdRegState, L1, NoComposite, SquaredL2

LOSS_KINDS = ("squared", "logistic", "hinge")


@dataclass(frozen=True, eq=False)
class ErmProblem:
    """Components ``f_j(x) = loss(a_j . x, b_j) / m`` plus the composite ``psi``.

    ``psi`` already carries its scale ``alpha`` (``L1(alpha)`` or
    ``SquaredL2(alpha)``); ``None`` means no composite term.
    """

    features: np.ndarray
    labels: np.ndarray
    loss: str
    box: Hyperrectangle
    psi: L1 | SquaredL2 | None = None

    def __post_init__(self):
        A = np.array(self.features, dtype=float)
        b = np.array(self.labels, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape[0] < 1:
            raise ValueError("features must be an m x n matrix with m >= 1")
        if b.shape[0] != A.shape[0]:
            raise ValueError("one label per example is required")
        if A.shape[1] != self.box.n:
            raise ValueError("feature dimension differs from the box")
        if self.loss not in LOSS_KINDS:
            raise ValueError(f"loss must be one of {LOSS_KINDS}")
        if self.loss != "squared" and not np.all(np.abs(b) == 1.0):
            raise ValueError("classification labels must be +1 or -1")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("data must be finite")
        if isinstance(self.psi, NoComposite):
            object.__setattr__(self, "psi", None)
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "features", A)
        object.__setattr__(self, "labels", b)
        with np.errstate(over="ignore"):
            L = self._lipschitz()
        if not np.all(np.isfinite(L)):
            raise ValueError("component gradient bounds overflow on this box")
        if np.any(L <= 0):
            raise ValueError("every component needs a positive gradient bound (zero feature row?)")
        L.setflags(write=False)
        object.__setattr__(self, "lipschitz", L)
        object.__setattr__(self, "F", ErmObjective(self))

    @property
    def m(self) -> int:
        return self.features.shape[0]

    @property
    def n(self) -> int:
        return self.features.shape[1]

    @property
    def alpha(self) -> float:
        return 0.0 if self.psi is None else self.psi.alpha

    # -- per-component oracles
    def _slopes(self, x, rows=slice(None)):
        z = self.features[rows] @ np.asarray(x, dtype=float)
        b = self.labels[rows]
        if self.loss == "squared":
            return z - b
        if self.loss == "logistic":
            # d/dz log(1 + exp(-b z)) = -b / (1 + exp(b z))
            return -b * _expit(-b * z)
        return np.where(b * z < 1.0, -b, 0.0)

    def component_values(self, x) -> np.ndarray:
        z = self.features @ np.asarray(x, dtype=float)
        b = self.labels
        if self.loss == "squared":
            v = 0.5 * (z - b) ** 2
        elif self.loss == "logistic":
            v = np.logaddexp(0.0, -b * z)
        else:
            v = np.maximum(0.0, 1.0 - b * z)
        return v / self.m

    def component_grad(self, j: int, x) -> np.ndarray:
        s = self._slopes(x, slice(j, j + 1))[0]
        return s * self.features[j] / self.m

    def component_grads(self, x) -> np.ndarray:
        """All component gradients as an ``m x n`` array."""
        return self._slopes(x)[:, None] * self.features / self.m

    def H(self, x) -> float:
        v = float(np.sum(self.component_values(x)))
        return v + (self.psi(x) if self.psi is not None else 0.0)

    # -- declared bounds
    def _lipschitz(self) -> np.ndarray:
        return np.max(np.abs(self.features), axis=1) * self._slope_bounds() / self.m

    def _slope_bounds(self) -> np.ndarray:
        if self.loss == "squared":
            return np.abs(self.features) @ self.box.radii + np.abs(self.labels)
        return np.ones(self.m)

    def coordinate_lipschitz(self) -> np.ndarray:
        """Per-coordinate bound on ``|d F / d x_i|`` over the box."""
        return np.abs(self.features).T @ self._slope_bounds() / self.m

    def check_bounds(self, rng: np.random.Generator, points: int = 100) -> bool:
        """Debug check of the declared ``L_j`` on random box points."""
        for _ in range(points):
            G = self.component_grads(self.box.uniform_point(rng))
            if np.any(np.max(np.abs(G), axis=1) > self.lipschitz * (1 + 1e-12)):
                return False
        return True


def _expit(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass(frozen=True, eq=False)
class ErmObjective:
    """``F(x) = sum_j f_j(x)`` as a loss object (the loss of every round)."""

    problem: ErmProblem = field(repr=False)

    def value(self, x):
        return float(np.sum(self.problem.component_values(x)))

    def grad(self, x):
        return self.problem.component_grads(x).sum(axis=0)


def erm_distribution(lipschitz) -> np.ndarray:
    """``p_j = L_j / sum L``."""
    L = np.asarray(lipschitz, dtype=float)
    if L.ndim != 1 or L.size == 0 or np.any(L <= 0):
        raise ValueError("Lipschitz bounds must be positive")
    return L / L.sum()


def group_distribution(partition, lipschitz) -> np.ndarray:
    """Group probabilities proportional to the summed ``L_j`` of each group."""
    L = np.asarray(lipschitz, dtype=float)
    return erm_distribution([L[list(g)].sum() for g in partition])


def check_partition(partition, m: int) -> tuple:
    groups = tuple(tuple(int(j) for j in g) for g in partition)
    if not groups or any(len(g) == 0 for g in groups):
        raise ValueError("partition groups must be non-empty")
    if sorted(j for g in groups for j in g) != list(range(m)):
        raise ValueError("partition must cover each component exactly once")
    return groups


def erm_bound_terms(component_grads, snapshot, probs, partition=None) -> np.ndarray:
    """Per-coordinate ``sum_groups |sum_{j in group} (g^j - gbar^j)|^2 / p_group`` for one round."""
    d = np.asarray(component_grads, dtype=float) - np.asarray(snapshot, dtype=float)
    probs = np.asarray(probs, dtype=float)
    if partition is None:
        return np.sum(d * d / probs[:, None], axis=0)
    out = np.zeros(d.shape[1])
    for g, p in zip(partition, probs):
        s = d[list(g)].sum(axis=0)
        out += s * s / p
    return out


def erm_bound(radii, *, terms=None, lipschitz=None, T: int | None = None) -> float:
    """Data-dependent bound from per-round ``terms`` (``T x n``), else the worst case.

    Data-dependent: ``4 sum_i R_i sqrt(sum_t terms_{t,i})``.
    Worst case: ``8 sum_i R_i sqrt(T) sum_j L_j``.
    """
    R = np.asarray(radii, dtype=float)
    if terms is not None:
        terms = np.asarray(terms, dtype=float).reshape(-1, R.shape[0])
        return float(4.0 * np.sum(R * np.sqrt(terms.sum(axis=0))))
    if lipschitz is None or T is None:
        raise ValueError("need either the trace terms or (lipschitz, T)")
    return float(8.0 * np.sum(R) * math.sqrt(T) * float(np.sum(lipschitz)))


def group_estimate(problem: ErmProblem, x, index: int, partition, probs) -> np.ndarray:
    """Importance-weighted gradient of group ``index`` at ``x``."""
    rows = list(partition[index])
    g = problem._slopes(x, rows) @ problem.features[rows] / problem.m
    return g / probs[index]


@dataclass
class ErmTrace:
    sampled: list = field(default_factory=list)
    estimates: list = field(default_factory=list)
    est_predictions: list = field(default_factory=list)
    bound_terms: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)


def run_caos_reg_erm_epoch(problem: ErmProblem, k: int, T: int, seed: int = 0, *, probs=None,
                           comparator=None, find_comparator: bool = True,
                           oracle_config: oracle.OracleConfig = oracle.OracleConfig()) -> RegretReport:
    """One component sampled per round with ``p_j ∝ L_j`` (or ``probs``)."""
    partition = tuple((j,) for j in range(problem.m))
    p = erm_distribution(problem.lipschitz) if probs is None else _valid_probs(probs, problem.m)
    return _run_core(problem, partition, p, k, T, seed, "caos_reg_erm_epoch", comparator,
                     find_comparator, oracle_config)


def run_caos_reg_erm_epoch_minibatch(problem: ErmProblem, partition: Sequence[Sequence[int]], k: int, T: int,
                                     seed: int = 0, *, probs=None, comparator=None, find_comparator: bool = True,
                                     oracle_config: oracle.OracleConfig = oracle.OracleConfig()) -> RegretReport:
    """One group of components sampled per round; groups are drawn with ``p ∝ sum L_j`` (or ``probs``)."""
    groups = check_partition(partition, problem.m)
    p = group_distribution(groups, problem.lipschitz) if probs is None else _valid_probs(probs, len(groups))
    return _run_core(problem, groups, p, k, T, seed, "caos_reg_erm_epoch_minibatch", comparator,
                     find_comparator, oracle_config)


def _valid_probs(probs, size):
    p = np.asarray(probs, dtype=float).reshape(-1)
    if p.shape != (size,) or np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-12:
        raise ValueError("probabilities must be positive, one per group, and sum to 1")
    return p


def _run_core(problem, partition, probs, k, T, seed, name, comparator, find_comparator, oracle_config):
    if T < 1 or k < 1 or T % k:
        raise ValueError(f"the number of epochs k={k} must divide T={T}")
    epoch_len = T // k
    box, psi, n = problem.box, problem.psi, problem.n
    rng = np.random.default_rng(seed)
    n_groups = len(partition)
    state = AogdRegState.fresh(box.radii)
    x = box.center()
    G = np.zeros(n)
    est_pred = np.zeros(n)
    used = np.zeros((problem.m, n))
    snapshot = used
    trace: list = []
    extra = ErmTrace()
    j_t = int(rng.choice(n_groups, p=probs))
    for t in range(1, T + 1):
        if (t - 1) % epoch_len == 0:
            snapshot = problem.component_grads(x)
            extra.snapshots.append(t)
        grads = problem.component_grads(x)
        val = float(np.sum(problem.component_values(x)))
        g_hat = grads[list(partition[j_t])].sum(axis=0) / probs[j_t]
        if not (math.isfinite(val) and np.all(np.isfinite(g_hat))):
            raise StreamError(f"non-finite loss or gradient at round {t}")
        psi_val = psi(x) if psi is not None else 0.0
        state.accumulate(x, g_hat, est_pred)
        dual = state.dual_norm_sq(g_hat - est_pred)
        full_pred = used.sum(axis=0)
        trace.append(RoundRecord(t, x, val, grads.sum(axis=0), full_pred, dual, psi_val))
        extra.sampled.append(j_t)
        extra.estimates.append(g_hat)
        extra.est_predictions.append(est_pred)
        extra.bound_terms.append(erm_bound_terms(grads, used, probs, None if _singletons(partition) else partition))
        extra.objective.append(val + psi_val)
        G = G + g_hat
        # round t+1 predicts with the newest snapshot; it cannot use one taken at x_{t+1}
        used = snapshot
        j_t = int(rng.choice(n_groups, p=probs))
        est_pred = used[list(partition[j_t])].sum(axis=0) / probs[j_t]
        x = composite_step(state, G + est_pred, psi, t + 1, box, prev=x)
    if comparator is not None:
        x_star = np.asarray(comparator, dtype=float)
    elif find_comparator:
        x_star = oracle.best_fixed_point([problem.F], box, psi, 1, oracle_config).x
    else:
        x_star = box.center()
    total = math.fsum([r.loss for r in trace] + [r.composite for r in trace])
    regret = total - T * problem.H(x_star)
    report = RegretReport(T, name, trace, x_star, regret, total - T * problem.H(box.center()), {}, x,
                          [problem.F] * T, total)
    report.extras.update(composite=psi, state=state, erm=extra, probs=probs, partition=partition,
                         seed=seed, final_objective=problem.H(x))
    report.r_total_at = state.value
    report.bounds["erm"] = erm_bound(box.radii, terms=extra.bound_terms)
    report.bounds["erm_worst"] = erm_bound(box.radii, lipschitz=problem.lipschitz, T=T)
    return report


def _singletons(partition) -> bool:
    return all(len(g) == 1 for g in partition)
