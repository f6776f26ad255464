"""Randomized coordinate descent with importance-weighted gradient estimates.

Each round samples one coordinate block ``i_t ~ p``, and the solver sees only
``g_t`` restricted to that block, divided by ``p_{i_t}``. The next round's
block is drawn before the update so that the prediction entering the update
is estimated on the block it will be compared with.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import oracle
from .domains import Hyperrectangle
from .engine import RegretReport, RoundRecord, _check_finite, _finish, composite_step, theorem1_bound
from .predictors import PredictorKind, Zero
from .regularizers import AogdRegState

PROB_TOL = 1e-12


@dataclass(frozen=True)
class CoordSampler:
    """Distribution over coordinate blocks (singleton blocks unless a partition is given)."""

    probs: np.ndarray
    blocks: tuple = None

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).reshape(-1)
        if np.any(p <= 0) or abs(p.sum() - 1.0) > PROB_TOL:
            raise ValueError("probabilities must be positive and sum to 1")
        blocks = self.blocks
        if blocks is None:
            blocks = tuple((i,) for i in range(p.shape[0]))
        else:
            blocks = tuple(tuple(int(j) for j in b) for b in blocks)
            _check_partition(blocks, sum(len(b) for b in blocks))
        if len(blocks) != p.shape[0]:
            raise ValueError("one probability per block is required")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "blocks", blocks)

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    def coordinate_probs(self) -> np.ndarray:
        """Probability that each coordinate's block is drawn."""
        out = np.empty(self.n)
        for b, p in zip(self.blocks, self.probs):
            out[list(b)] = p
        return out

    def block_radii(self, radii) -> np.ndarray:
        radii = np.asarray(radii, dtype=float)
        return np.array([radii[list(b)].sum() for b in self.blocks])


def _check_partition(blocks, n):
    if any(len(b) == 0 for b in blocks):
        raise ValueError("empty block in partition")
    flat = sorted(j for b in blocks for j in b)
    if flat != list(range(n)):
        raise ValueError("blocks must be disjoint and cover 0..n-1")


def uniform_distribution(n: int) -> CoordSampler:
    return CoordSampler(np.full(n, 1.0 / n))


def lipschitz_distribution(radii, lipschitz) -> CoordSampler:
    """``p_i ∝ (R_i L_i)^(2/3)``, the minimizer of ``sum_i (R_i L_i)^2 / p_i``."""
    radii = np.asarray(radii, dtype=float)
    lipschitz = np.asarray(lipschitz, dtype=float)
    if radii.shape != lipschitz.shape or np.any(radii <= 0) or np.any(lipschitz <= 0):
        raise ValueError("radii and Lipschitz bounds must be positive and of equal length")
    w = (radii * lipschitz) ** (2.0 / 3.0)
    return CoordSampler(w / w.sum())


def minibatch_distribution(partition: Sequence[Sequence[int]], radii, lipschitz) -> CoordSampler:
    """Block probabilities ``∝ (S_k L_k)^(2/3)`` with ``S_k`` the summed radii of block ``k``."""
    blocks = tuple(tuple(int(j) for j in b) for b in partition)
    radii = np.asarray(radii, dtype=float)
    _check_partition(blocks, radii.shape[0])
    lipschitz = np.asarray(lipschitz, dtype=float)
    if lipschitz.shape != (len(blocks),) or np.any(lipschitz <= 0):
        raise ValueError("one positive Lipschitz bound per block is required")
    S = np.array([radii[list(b)].sum() for b in blocks])
    w = (S * lipschitz) ** (2.0 / 3.0)
    return CoordSampler(w / w.sum(), blocks)


def importance_estimate(g_component, index: int, sampler: CoordSampler | Sequence[float], n: int | None = None):
    """Vector equal to ``g_component / p_index`` on block ``index`` and zero elsewhere.

    ``g_component`` is the scalar (or block vector) of gradient entries on the block.
    """
    if not isinstance(sampler, CoordSampler):
        sampler = CoordSampler(np.asarray(sampler, dtype=float))
    p = sampler.probs[index]
    if not p > 0:
        raise ValueError("sampled block has zero probability")
    n = sampler.n if n is None else n
    out = np.zeros(n)
    out[list(sampler.blocks[index])] = np.asarray(g_component, dtype=float) / p
    return out


def rcd_lipschitz_bound(radii, lipschitz, T: int) -> float:
    """``2 sqrt(T) (sum_i (R_i L_i)^(2/3))^(3/2)``."""
    w = (np.asarray(radii, dtype=float) * np.asarray(lipschitz, dtype=float)) ** (2.0 / 3.0)
    return float(2.0 * np.sqrt(T) * np.sum(w) ** 1.5)


def cao_rcd_bound(true_grads, predictions, coord_probs, radii) -> float:
    """``4 sum_i R_i sqrt(sum_t (g_{t,i} - g~_{t,i})^2 / p_i)`` on a recorded trace."""
    if len(true_grads) == 0:
        return 0.0
    d = np.asarray(true_grads, dtype=float) - np.asarray(predictions, dtype=float)
    inner = np.sum(d * d, axis=0) / np.asarray(coord_probs, dtype=float)
    return float(4.0 * np.sum(np.asarray(radii, dtype=float) * np.sqrt(inner)))


@dataclass(frozen=True)
class Uniform:
    pass


@dataclass(frozen=True)
class Lipschitz:
    lipschitz: tuple

    def __post_init__(self):
        object.__setattr__(self, "lipschitz", tuple(float(v) for v in np.ravel(self.lipschitz)))


@dataclass(frozen=True)
class MiniBatch:
    partition: tuple
    lipschitz: tuple

    def __post_init__(self):
        object.__setattr__(self, "partition", tuple(tuple(int(j) for j in b) for b in self.partition))
        object.__setattr__(self, "lipschitz", tuple(float(v) for v in np.ravel(self.lipschitz)))


SamplerPolicy = Uniform | Lipschitz | MiniBatch


def sampler_for(policy: SamplerPolicy | CoordSampler, box: Hyperrectangle) -> CoordSampler:
    if isinstance(policy, CoordSampler):
        return policy
    if isinstance(policy, Uniform):
        return uniform_distribution(box.n)
    if isinstance(policy, Lipschitz):
        return lipschitz_distribution(box.radii, policy.lipschitz)
    if isinstance(policy, MiniBatch):
        return minibatch_distribution(policy.partition, box.radii, policy.lipschitz)
    raise TypeError(f"unknown sampler policy {policy!r}")


def _partial(loss, x, block):
    # the solver only ever sees the sampled block
    if hasattr(loss, "partial_grad"):
        return loss.partial_grad(x, block)
    return np.asarray(loss.grad(x), dtype=float)[list(block)]


@dataclass
class RcdTrace:
    sampled: list = field(default_factory=list)
    estimates: list = field(default_factory=list)
    est_predictions: list = field(default_factory=list)
    predictions: list = field(default_factory=list)


def run_cao_rcd(stream, box: Hyperrectangle, sampler_policy: SamplerPolicy | CoordSampler = Uniform(),
                predictor: PredictorKind = Zero(), composite=None, T: int = 100, seed: int = 0, *,
                find_comparator: bool = True,
                oracle_config: oracle.OracleConfig = oracle.OracleConfig()) -> RegretReport:
    """Composite adaptive optimistic RCD; regret is measured with the true losses.

    The predictor sees the history of importance-weighted estimates; its
    output is itself importance weighted on the block sampled for the next
    round.
    """
    if T < 0:
        raise ValueError("T must be non-negative")
    sampler = sampler_for(sampler_policy, box)
    if sampler.n != box.n:
        raise ValueError("sampler and box dimensions differ")
    n = box.n
    rng = np.random.default_rng(seed)
    blocks, probs = sampler.blocks, sampler.probs
    k = len(blocks)
    state = AogdRegState.fresh(box.radii)
    x = box.center()
    G = np.zeros(n)
    est_pred = np.zeros(n)
    pred_full = np.zeros(n)
    history: list = []
    trace: list = []
    losses: list = []
    extra = RcdTrace()
    i_t = int(rng.choice(k, p=probs))
    for t in range(1, T + 1):
        f = stream.loss(t)
        val = f.value(x)
        block = blocks[i_t]
        part = np.asarray(_partial(f, x, block), dtype=float)
        _check_finite(val, part, t)
        g_hat = importance_estimate(part, i_t, sampler)
        psi_val = composite(x) if composite is not None else 0.0
        state.accumulate(x, g_hat, est_pred)
        dual = state.dual_norm_sq(g_hat - est_pred)
        # the full gradient is recorded for reporting only
        trace.append(RoundRecord(t, x, val, np.asarray(f.grad(x), dtype=float), pred_full, dual, psi_val))
        losses.append(f)
        extra.sampled.append(i_t)
        extra.estimates.append(g_hat)
        extra.est_predictions.append(est_pred)
        extra.predictions.append(pred_full)
        history.append(g_hat)
        G = G + g_hat
        i_t = int(rng.choice(k, p=probs))
        pred_full = np.asarray(predictor.predict(history, n), dtype=float)
        nb = blocks[i_t]
        est_pred = importance_estimate(pred_full[list(nb)], i_t, sampler)
        x = composite_step(state, G + est_pred, composite, t + 1, box, prev=x)
    report = _finish(trace, losses, box, composite, "cao_rcd", x, find_comparator, oracle_config)
    report.extras.update(state=state, sampler=sampler, seed=seed, rcd=extra)
    report.r_total_at = state.value
    if T:
        cp = sampler.coordinate_probs()
        report.bounds["theorem1"] = theorem1_bound(trace, state.value, report.comparator)
        report.bounds["cao_rcd"] = cao_rcd_bound([r.grad for r in trace], extra.predictions, cp, box.radii)
        d = np.asarray(extra.estimates) - np.asarray(extra.est_predictions)
        report.bounds["cao_rcd_sample"] = float(4.0 * np.sum(box.radii * np.sqrt(np.sum(d * d, axis=0))))
        if isinstance(sampler_policy, Lipschitz):
            report.bounds["rcd_lipschitz"] = rcd_lipschitz_bound(box.radii, sampler_policy.lipschitz, T)
        elif isinstance(sampler_policy, MiniBatch):
            S = sampler.block_radii(box.radii)
            report.bounds["rcd_lipschitz"] = rcd_lipschitz_bound(S, sampler_policy.lipschitz, T)
    else:
        report.bounds.update(theorem1=0.0, cao_rcd=0.0, cao_rcd_sample=0.0)
    return report
