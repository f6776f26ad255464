"""Feasible sets: the per-coordinate box and the probability simplex."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SIMPLEX_SUM_TOL = 1e-12
SIMPLEX_NEG_TOL = 1e-15


def _as_vector(x, n: int, name: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise ValueError(f"{name} must have shape ({n},), got {arr.shape}")
    return arr


@dataclass(frozen=True)
class Hyperrectangle:
    """The box ``[-R_1, R_1] x ... x [-R_n, R_n]``."""

    radii: np.ndarray

    def __post_init__(self):
        radii = np.array(self.radii, dtype=float).reshape(-1)
        if radii.size == 0:
            raise ValueError("a box needs at least one coordinate")
        if not np.all(np.isfinite(radii)) or np.any(radii <= 0):
            raise ValueError("box radii must be finite and strictly positive")
        radii.setflags(write=False)
        object.__setattr__(self, "radii", radii)

    @classmethod
    def cube(cls, n: int, radius: float = 1.0) -> "Hyperrectangle":
        return cls(np.full(n, float(radius)))

    @property
    def n(self) -> int:
        return self.radii.shape[0]

    @property
    def diameter(self) -> float:
        return float(2.0 * np.linalg.norm(self.radii))

    def contains(self, x) -> bool:
        x = _as_vector(x, self.n)
        return bool(np.all(np.abs(x) <= self.radii))

    def clip(self, v) -> np.ndarray:
        v = _as_vector(v, self.n, "v")
        return np.minimum(np.maximum(v, -self.radii), self.radii)

    def project(self, v) -> np.ndarray:
        return self.clip(v)

    def center(self) -> np.ndarray:
        return np.zeros(self.n)

    def uniform_point(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(-self.radii, self.radii)

    def __eq__(self, other):
        return isinstance(other, Hyperrectangle) and np.array_equal(self.radii, other.radii)

    def __hash__(self):
        return hash(self.radii.tobytes())


@dataclass(frozen=True)
class Simplex:
    """The probability simplex in ``n >= 2`` dimensions."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("simplex dimension must be an integer >= 2")

    @property
    def diameter(self) -> float:
        return float(np.sqrt(2.0))

    def contains(self, x) -> bool:
        x = _as_vector(x, self.n)
        if np.any(x < -SIMPLEX_NEG_TOL):
            return False
        return bool(abs(np.sum(np.maximum(x, 0.0)) - 1.0) <= SIMPLEX_SUM_TOL)

    def project(self, v) -> np.ndarray:
        """Euclidean projection onto the simplex (sort-and-threshold)."""
        v = _as_vector(v, self.n, "v")
        u = np.sort(v)[::-1]
        css = np.cumsum(u) - 1.0
        ind = np.arange(1, self.n + 1)
        rho = np.nonzero(u - css / ind > 0)[0][-1]
        theta = css[rho] / (rho + 1.0)
        return np.maximum(v - theta, 0.0)

    def center(self) -> np.ndarray:
        return np.full(self.n, 1.0 / self.n)

    def uniform_point(self, rng: np.random.Generator) -> np.ndarray:
        return rng.dirichlet(np.ones(self.n))


Domain = Hyperrectangle | Simplex


def contains(domain: Domain, x) -> bool:
    return domain.contains(x)


def clip_to_box(domain: Hyperrectangle, v) -> np.ndarray:
    if not isinstance(domain, Hyperrectangle):
        raise TypeError("clip_to_box needs a Hyperrectangle")
    return domain.clip(v)


def center(domain: Domain) -> np.ndarray:
    return domain.center()


def clean_simplex_point(x: np.ndarray) -> np.ndarray:
    # arithmetic noise can leave -1e-17 entries after a softmax or projection
    x = np.where(np.abs(x) <= SIMPLEX_NEG_TOL, 0.0, x)
    return x
