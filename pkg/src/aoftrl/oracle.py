"""Independent numeric checks for the closed-form updates and bounds.

Nothing here calls into the update rules it is used to certify.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .domains import Simplex
from .losses import CompositeObjective, aggregate


class OracleBudgetWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class OracleConfig:
    budget: int = 50_000
    method: str = "ellipsoid"  # or "subgradient"
    tol: float = 1e-8  # objective decrease per restart stage ("subgradient")
    gap_tol: float = 1e-14  # certified optimality gap, relative to 1 + |f| ("ellipsoid")
    xtol: float = 1e-10  # final ellipsoid radius / step length, relative to the domain diameter
    stage_length: int = 100
    step_scale: float | None = None  # defaults to the domain diameter
    grid_resolution: float = 1e-3
    snap_tol: float = 1e-7  # distance to a box face, relative to its radius, that is snapped onto it

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if not (self.tol > 0 and self.xtol > 0 and self.gap_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.stage_length < 1:
            raise ValueError("stage_length must be >= 1")
        if self.method not in ("ellipsoid", "subgradient"):
            raise ValueError(f"unknown oracle method {self.method!r}")


@dataclass
class ArgminResult:
    x: np.ndarray
    value: float
    iterations: int
    converged: bool


def _as_value_grad(objective) -> Callable:
    if hasattr(objective, "value") and hasattr(objective, "grad"):
        return lambda x: (objective.value(x), objective.grad(x))
    return objective


def numeric_argmin(objective, domain, config: OracleConfig = OracleConfig(), x0=None) -> ArgminResult:
    """Minimize a convex ``objective`` over ``domain`` from values and subgradients only.

    ``objective`` is either a callable returning ``(value, subgradient)`` or an
    object with ``value``/``grad`` methods. The default method is the
    central-cut ellipsoid method; ``method="subgradient"`` selects projected
    subgradient descent with step-halving restarts. A result with
    ``converged=False`` (and an :class:`OracleBudgetWarning`) is the best point
    found when the budget ran out.
    """
    fg = _as_value_grad(objective)
    if config.method == "ellipsoid":
        result = _ellipsoid(fg, domain, config)
    else:
        result = _subgradient(fg, domain, config, x0)
    if not isinstance(domain, Simplex):
        result = _polish_faces(fg, domain, result, config)
    if not result.converged:
        warnings.warn("numeric_argmin exhausted its budget", OracleBudgetWarning, stacklevel=2)
    return result


class _BoxChart:
    """Identity chart for a box: full-dimensional already."""

    def __init__(self, box):
        self.radii = box.radii
        self.dim = box.n
        self.center = np.zeros(self.dim)
        # the ellipsoid sum x_i^2 / (n R_i^2) <= 1 encloses the box
        self.P0 = np.diag(self.dim * self.radii ** 2)

    def to_x(self, y):
        return y

    def violated(self, y):
        excess = np.abs(y) - self.radii
        i = int(np.argmax(excess))
        if excess[i] <= 0:
            return None
        cut = np.zeros(self.dim)
        cut[i] = np.sign(y[i])
        return cut

    def pull_back(self, g):
        return g


class _SimplexChart:
    """The simplex in the first ``n - 1`` coordinates: ``{y >= 0, sum y <= 1}``."""

    def __init__(self, simplex):
        self.n = simplex.n
        self.dim = simplex.n - 1
        self.center = np.full(self.dim, 1.0 / self.n)
        # every vertex lies within distance 1 of the barycenter
        self.P0 = np.eye(self.dim)

    def to_x(self, y):
        x = np.empty(self.n)
        x[:-1] = y
        x[-1] = 1.0 - np.sum(y)
        return np.maximum(x, 0.0)

    def violated(self, y):
        i = int(np.argmin(y))
        if y[i] < 0:
            cut = np.zeros(self.dim)
            cut[i] = -1.0
            return cut
        if np.sum(y) > 1.0:
            return np.ones(self.dim)
        return None

    def pull_back(self, g):
        return g[:-1] - g[-1]


def _ellipsoid(fg, domain, config):
    chart = _SimplexChart(domain) if isinstance(domain, Simplex) else _BoxChart(domain)
    d = chart.dim
    y = chart.center.copy()
    P = chart.P0.copy()
    best_x, best_f = None, np.inf
    lower = -np.inf
    xtol = config.xtol * domain.diameter
    used = 0
    converged = False
    while used < config.budget:
        cut = chart.violated(y)
        if cut is None:
            x = chart.to_x(y)
            f, g = fg(x)
            used += 1
            f = float(f)
            if f < best_f:
                best_x, best_f = x.copy(), f
            cut = chart.pull_back(np.asarray(g, dtype=float))
            if not np.any(cut):
                best_x, best_f = x.copy(), f
                converged = True
                break
            width = float(np.sqrt(max(cut @ P @ cut, 0.0)))
            lower = max(lower, f - width)
            if best_f - lower <= config.gap_tol * (1.0 + abs(best_f)):
                converged = True
                break
        Pc = P @ cut
        cPc = float(cut @ Pc)
        if cPc <= 0.0:
            converged = best_x is not None
            break
        step = Pc / np.sqrt(cPc)
        if d == 1:
            # one-dimensional ellipsoid: plain bisection
            y = y - step / 2.0
            P = P / 4.0
        else:
            y = y - step / (d + 1.0)
            P = (d * d / (d * d - 1.0)) * (P - (2.0 / (d + 1.0)) * np.outer(step, step))
            P = 0.5 * (P + P.T)
        if best_x is not None and np.sqrt(np.max(np.diag(P))) <= xtol:
            converged = True
            break
    if best_x is None:
        best_x = domain.center()
        best_f = float(fg(best_x)[0])
    return ArgminResult(best_x, best_f, used, converged)


def _polish_faces(fg, box, result, config):
    # minimizers on a face are only located to ~xtol; snapping them onto the
    # face removes an error that otherwise scales with the objective's size
    x = result.x
    tol = config.snap_tol * box.radii
    near_hi, near_lo = x >= box.radii - tol, x <= -box.radii + tol
    if not (np.any(near_hi) or np.any(near_lo)):
        return result
    snapped = np.where(near_hi, box.radii, np.where(near_lo, -box.radii, x))
    f = float(fg(snapped)[0])
    if f <= result.value:
        return ArgminResult(snapped, f, result.iterations + 1, result.converged)
    return result


def _subgradient(fg, domain, config, x0):
    x = domain.center() if x0 is None else domain.project(np.asarray(x0, dtype=float))
    diameter = domain.diameter
    scale = config.step_scale if config.step_scale is not None else diameter
    f, g = fg(x)
    best_x, best_f = x.copy(), float(f)
    used = 1
    converged = False
    sqrt_k = np.sqrt(np.arange(1, config.stage_length + 1))
    while used < config.budget:
        x = best_x.copy()
        stage_start = best_f
        for k in range(config.stage_length):
            gn = float(np.linalg.norm(g))
            if gn == 0.0:
                converged = True
                break
            x = domain.project(x - (scale / sqrt_k[k] / gn) * g)
            f, g = fg(x)
            used += 1
            if f < best_f:
                best_x, best_f = x.copy(), float(f)
            if used >= config.budget:
                break
        if converged:
            break
        if scale <= config.xtol * diameter and stage_start - best_f <= config.tol * max(1.0, abs(best_f)):
            converged = True
            break
        scale *= 0.5
        f, g = fg(best_x)
    return ArgminResult(best_x, best_f, used, converged)


def best_fixed_point(losses: Sequence, domain, composite=None, rounds: int | None = None,
                     config: OracleConfig = OracleConfig()) -> ArgminResult:
    """Best fixed comparator for the cumulative loss ``sum_t f_t (+ rounds * psi)``."""
    losses = list(losses)
    if rounds is None:
        rounds = len(losses)
    if not losses:
        x = domain.center()
        return ArgminResult(x, 0.0, 0, True)
    total = aggregate(losses)
    weight = float(rounds) if composite is not None else 0.0
    return numeric_argmin(CompositeObjective(total, composite, weight), domain, config)


def brute_force_inf(column_norms, n: int | None = None, grid_resolution: float = 1e-3) -> float:
    """Grid search for ``inf sum_i c_i^2 / s_i`` over ``s >= 0, sum_i s_i <= n``.

    The objective decreases in every ``s_i``, so only the face ``sum s = n`` is
    searched. Coordinates with ``c_i = 0`` take no budget.
    """
    c = np.asarray(column_norms, dtype=float)
    if n is None:
        n = c.shape[0]
    active = c[c > 0]
    k = active.shape[0]
    if k == 0:
        return 0.0
    if k > 3:
        raise ValueError("grid search is limited to three active coordinates")
    steps = int(round(1.0 / grid_resolution))
    c2 = active ** 2
    if k == 1:
        return float(c2[0] / n)
    grid = np.arange(1, steps) / steps  # fractions strictly inside (0, 1)
    if k == 2:
        vals = c2[0] / (n * grid) + c2[1] / (n * (1.0 - grid))
        return float(vals.min())
    best = np.inf
    for u in grid:
        rest = grid[grid < 1.0 - u - 0.5 / steps]
        if rest.size == 0:
            continue
        w = 1.0 - u - rest
        vals = c2[0] / (n * u) + c2[1] / (n * rest) + c2[2] / (n * w)
        best = min(best, float(vals.min()))
    return best


@dataclass(frozen=True)
class Lemma2Result:
    lhs: float
    rhs: float
    holds: bool


def lemma2_check(a: Sequence[float]) -> Lemma2Result:
    """``sum_j a_j / sqrt(a_{1:j}) <= 2 sqrt(a_{1:t})`` with 0/0 read as 0."""
    arr = np.asarray(list(a), dtype=float)
    if np.any(arr < 0):
        raise ValueError("sequence must be non-negative")
    if arr.size == 0:
        return Lemma2Result(0.0, 0.0, True)
    csum = np.cumsum(arr)
    terms = np.zeros_like(arr)
    pos = arr > 0
    terms[pos] = arr[pos] / np.sqrt(csum[pos])
    lhs = float(terms.sum())
    rhs = float(2.0 * np.sqrt(csum[-1]))
    return Lemma2Result(lhs, rhs, lhs <= rhs + 1e-12)


def grid_points_simplex(n: int, resolution: float):
    """All points of the simplex grid with spacing ``resolution`` (strictly positive entries)."""
    steps = int(round(1.0 / resolution))
    for combo in itertools.product(range(1, steps), repeat=n - 1):
        s = sum(combo)
        if s < steps:
            yield np.array(list(combo) + [steps - s], dtype=float) / steps
