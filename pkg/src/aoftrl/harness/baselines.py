"""Reference online learners: projected OGD, diagonal AdaGrad, fixed-rate EG."""

from __future__ import annotations

import numpy as np

from .. import oracle
from ..domains import Hyperrectangle, Simplex
from ..engine import RoundRecord, _check_finite, _finish, aoeg_step

ADAGRAD_EPS = 1e-12


def run_baseline(kind: str, stream, domain, T: int, *, eta: float | None = None,
                 find_comparator: bool = True,
                 oracle_config: oracle.OracleConfig = oracle.OracleConfig()):
    """Run ``"ogd"``, ``"adagrad"`` or ``"eg"`` and report regret (no bounds attached).

    OGD uses ``eta_t = c / sqrt(t)`` with ``c = min_i R_i / G`` where ``G`` is the
    declared gradient bound; AdaGrad uses per-coordinate rates
    ``sqrt(2) R_i / sqrt(sum_s g_{s,i}^2 + eps)``; EG defaults to
    ``eta = sqrt(8 log n / T)``.
    """
    key = kind.lower()
    if key in ("ogd", "adagrad", "adagrad_diag", "adagraddiag"):
        if not isinstance(domain, Hyperrectangle):
            raise TypeError(f"{kind} needs a box domain")
    elif key in ("eg", "fixed_eta_eg", "fixedetaeg"):
        if not isinstance(domain, Simplex):
            raise TypeError("EG needs the simplex")
    else:
        raise ValueError(f"unknown baseline {kind!r}")

    x = domain.center()
    n = x.shape[0]
    trace, losses = [], []
    sq_sum = np.zeros(n)
    G = np.zeros(n)
    if key == "ogd":
        gmax = float(np.max(stream.lipschitz)) if np.max(stream.lipschitz) > 0 else 1.0
        c = float(np.min(domain.radii)) / gmax if eta is None else eta
    elif key.startswith("ada"):
        rate = np.sqrt(2.0) * domain.radii if eta is None else np.full(n, eta)
    else:
        eg_eta = np.sqrt(8.0 * np.log(n) / max(T, 1)) if eta is None else eta
    for t in range(1, T + 1):
        f = stream.loss(t)
        val = f.value(x)
        g = np.asarray(f.grad(x), dtype=float)
        _check_finite(val, g, t)
        trace.append(RoundRecord(t, x, val, g, np.zeros(n), 0.0))
        losses.append(f)
        if key == "ogd":
            x = domain.clip(x - (c / np.sqrt(t)) * g)
        elif key.startswith("ada"):
            sq_sum += g * g
            x = domain.clip(x - rate * g / np.sqrt(sq_sum + ADAGRAD_EPS))
        else:
            G = G + g
            # multiplicative weights: x ∝ exp(-eta G)
            x = aoeg_step(1.0 / eg_eta, G)
    name = {"ogd": "ogd", "eg": "fixed_eta_eg", "fixed_eta_eg": "fixed_eta_eg",
            "fixedetaeg": "fixed_eta_eg"}.get(key, "adagrad_diag")
    return _finish(trace, losses, domain, None, name, x, find_comparator, oracle_config)
