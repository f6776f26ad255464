"""Convex per-round losses with value and subgradient oracles.

Sums of losses of one family collapse into a single loss of that family, so
cumulative objectives over long horizons stay O(n) to evaluate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Protocol

import numpy as np


class Loss(Protocol):
    def value(self, x: np.ndarray) -> float: ...

    def grad(self, x: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class LinearLoss:
    """``f(x) = g . x``."""

    g: np.ndarray

    def value(self, x):
        return float(np.dot(self.g, x))

    def grad(self, x):
        return np.array(self.g, dtype=float)

    def partial_grad(self, x, block):
        return np.asarray(self.g, dtype=float)[list(block)]


@dataclass(frozen=True)
class QuadraticLoss:
    """``f(x) = (curvature / 2) ||x - center||^2 + offset``."""

    curvature: float
    center: np.ndarray
    offset: float = 0.0

    def value(self, x):
        d = np.asarray(x, dtype=float) - self.center
        return 0.5 * self.curvature * float(np.dot(d, d)) + self.offset

    def grad(self, x):
        return self.curvature * (np.asarray(x, dtype=float) - self.center)

    def partial_grad(self, x, block):
        idx = list(block)
        return self.curvature * (np.asarray(x, dtype=float)[idx] - np.asarray(self.center)[idx])


@dataclass(frozen=True)
class ScaledLoss:
    weight: float
    base: object

    def value(self, x):
        return self.weight * self.base.value(x)

    def grad(self, x):
        return self.weight * self.base.grad(x)


@dataclass(frozen=True)
class SumLoss:
    parts: tuple

    def value(self, x):
        return float(sum(p.value(x) for p in self.parts))

    def grad(self, x):
        out = np.zeros_like(np.asarray(x, dtype=float))
        for p in self.parts:
            out = out + p.grad(x)
        return out


def aggregate(losses: Iterable) -> object:
    """Sum of ``losses`` as one loss object, merging linear and quadratic terms."""
    linear = []
    curv = 0.0
    weighted_center = None
    sq_center = 0.0
    offset = 0.0
    others: dict[int, list] = {}
    any_quad = False
    for f in losses:
        if isinstance(f, LinearLoss):
            linear.append(np.asarray(f.g, dtype=float))
        elif isinstance(f, QuadraticLoss):
            any_quad = True
            c = np.asarray(f.center, dtype=float)
            curv += f.curvature
            weighted_center = f.curvature * c if weighted_center is None else weighted_center + f.curvature * c
            sq_center += f.curvature * float(np.dot(c, c))
            offset += f.offset
        else:
            # identical objects (e.g. the ERM objective repeated every round) are counted
            others.setdefault(id(f), [f, 0])[1] += 1
    parts = []
    if linear:
        # compensated sums keep long horizons exact to rounding
        parts.append(LinearLoss(np.array([math.fsum(col) for col in np.array(linear).T])))
    if any_quad:
        if curv > 0:
            center = weighted_center / curv
            # sum_t (k_t/2)||x - c_t||^2 = (K/2)||x - cbar||^2 + const
            const = 0.5 * (sq_center - curv * float(np.dot(center, center))) + offset
            parts.append(QuadraticLoss(curv, center, const))
        else:
            parts.append(LinearLoss(np.zeros_like(weighted_center)))
    for f, count in others.values():
        parts.append(f if count == 1 else ScaledLoss(float(count), f))
    if len(parts) == 1:
        return parts[0]
    return SumLoss(tuple(parts))


@dataclass(frozen=True)
class CompositeObjective:
    """``loss(x) + weight * psi(x)`` as a value/subgradient pair."""

    loss: object
    psi: object = None
    weight: float = 1.0

    def value(self, x):
        v = self.loss.value(x)
        if self.psi is not None:
            v += self.weight * self.psi(x)
        return v

    def grad(self, x):
        g = self.loss.grad(x)
        if self.psi is not None:
            g = g + self.weight * self.psi.subgradient(x)
        return g

    def __call__(self, x):
        return self.value(x), self.grad(x)
