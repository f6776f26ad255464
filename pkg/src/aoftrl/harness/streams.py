"""Seeded, deterministic loss streams.

A stream is fixed by ``(kind, seed)``: every call to :func:`generate_stream`
with the same arguments yields the same losses.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..domains import Hyperrectangle, Simplex
from ..losses import LinearLoss, QuadraticLoss


@dataclass(frozen=True)
class FixedLinear:
    g: tuple

    def __post_init__(self):
        object.__setattr__(self, "g", tuple(float(v) for v in np.ravel(self.g)))


@dataclass(frozen=True)
class SlowlyVaryingLinear:
    """Gradient random walk ``g_t = clip(g_{t-1} + sigma u_t, -bound, bound)``, ``u_t ~ U[-1,1]^n``.

    ``base`` is the first gradient; when ``None`` it is drawn from the seed.
    """

    sigma: float
    base: tuple | None = None
    bound: float = 1.0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.base is not None:
            base = tuple(float(v) for v in np.ravel(self.base))
            if max(abs(v) for v in base) > self.bound:
                raise ValueError("base gradient exceeds the declared bound")
            object.__setattr__(self, "base", base)


@dataclass(frozen=True)
class RandomLinear:
    """I.i.d. gradients, uniform on ``[-scale, scale]^n`` (``[0, scale]^n`` if ``nonnegative``)."""

    scale: float = 1.0
    nonnegative: bool = False

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")


@dataclass(frozen=True)
class QuadraticBox:
    """``f_t(x) = (curvature / 2) ||x - c_t||^2`` with the center drifting inside the box."""

    curvature: float = 1.0
    drift: float = 0.01

    def __post_init__(self):
        if not self.curvature > 0 or self.drift < 0:
            raise ValueError("curvature must be positive and drift non-negative")


@dataclass(frozen=True)
class ErmLogistic:
    m: int = 50
    data_seed: int = 0
    n: int = 10


@dataclass(frozen=True)
class ErmHinge:
    m: int = 50
    data_seed: int = 0
    n: int = 10


@dataclass(frozen=True)
class ErmLasso:
    m: int = 50
    data_seed: int = 0
    alpha: float = 0.1
    n: int = 20


LossStreamKind = FixedLinear | SlowlyVaryingLinear | RandomLinear | QuadraticBox | ErmLogistic | ErmHinge | ErmLasso


@dataclass
class LossStream:
    """Round-indexed losses (``t`` is 1-based) plus declared per-coordinate gradient bounds."""

    n: int
    T: int
    lipschitz: np.ndarray
    _losses: list = field(repr=False, default_factory=list)
    _constant: object = field(repr=False, default=None)

    def loss(self, t: int):
        if not 1 <= t <= self.T:
            raise IndexError(f"round {t} outside 1..{self.T}")
        if self._constant is not None:
            return self._constant
        return self._losses[t - 1]

    def gradients(self) -> np.ndarray:
        """Gradient matrix (T x n) of a linear stream."""
        return np.array([self.loss(t).g for t in range(1, self.T + 1)]).reshape(self.T, self.n)


def _dimension(domain) -> int:
    return domain.n


def generate_stream(kind: LossStreamKind, seed: int, T: int, domain) -> LossStream:
    if T < 0:
        raise ValueError("T must be non-negative")
    n = _dimension(domain)
    rng = np.random.default_rng(seed)
    if isinstance(kind, FixedLinear):
        g = np.asarray(kind.g, dtype=float)
        if g.shape != (n,):
            raise ValueError(f"gradient has {g.shape[0]} entries, domain has {n}")
        return LossStream(n, T, np.abs(g), _constant=LinearLoss(g))
    if isinstance(kind, SlowlyVaryingLinear):
        if kind.base is None:
            g = rng.uniform(-kind.bound, kind.bound, n)
        else:
            g = np.asarray(kind.base, dtype=float)
            if g.shape != (n,):
                raise ValueError(f"base gradient has {g.shape[0]} entries, domain has {n}")
        steps = rng.uniform(-1.0, 1.0, (max(T - 1, 0), n)) * kind.sigma
        grads = np.empty((T, n))
        for t in range(T):
            if t:
                g = np.clip(g + steps[t - 1], -kind.bound, kind.bound)
            grads[t] = g
        return LossStream(n, T, np.full(n, kind.bound), [LinearLoss(row) for row in grads])
    if isinstance(kind, RandomLinear):
        low = 0.0 if kind.nonnegative else -kind.scale
        grads = rng.uniform(low, kind.scale, (T, n))
        return LossStream(n, T, np.full(n, kind.scale), [LinearLoss(row) for row in grads])
    if isinstance(kind, QuadraticBox):
        if not isinstance(domain, Hyperrectangle):
            raise TypeError("QuadraticBox needs a box domain")
        R = domain.radii
        c = rng.uniform(-R, R) / 2.0
        losses = []
        for _ in range(T):
            losses.append(QuadraticLoss(kind.curvature, c.copy()))
            c = np.clip(c + kind.drift * rng.uniform(-1.0, 1.0, n) * R, -R, R)
        return LossStream(n, T, 2.0 * kind.curvature * R, losses)
    if isinstance(kind, (ErmLogistic, ErmHinge, ErmLasso)):
        from .data import erm_problem_for
        problem = erm_problem_for(kind, domain)
        return LossStream(n, T, problem.coordinate_lipschitz(), _constant=problem.F)
    raise TypeError(f"unknown stream kind {kind!r}")


def default_domain(kind, n: int, radius: float = 1.0):
    """Simplex for nonnegative random streams used with AO-EG, box otherwise."""
    if isinstance(kind, RandomLinear) and kind.nonnegative:
        return Simplex(n)
    return Hyperrectangle.cube(n, radius)
