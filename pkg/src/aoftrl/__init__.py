"""Adaptive optimistic follow-the-regularized-leader algorithms and their regret bounds."""

from .domains import Hyperrectangle, Simplex
from .engine import AOEG, AOGD, CAOGD_L1, RegretReport, run_online
from .erm import ErmProblem, run_caos_reg_erm_epoch, run_caos_reg_erm_epoch_minibatch
from .predictors import HalfLipschitz, LastGradient, Zero
from .rcd import run_cao_rcd

__version__ = "0.1.0"

__all__ = [
    "AOEG",
    "AOGD",
    "CAOGD_L1",
    "ErmProblem",
    "HalfLipschitz",
    "Hyperrectangle",
    "LastGradient",
    "RegretReport",
    "Simplex",
    "Zero",
    "run_cao_rcd",
    "run_caos_reg_erm_epoch",
    "run_caos_reg_erm_epoch_minibatch",
    "run_online",
]
