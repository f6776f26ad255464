"""Loss-stream generators, baselines and the experiment runner."""

from .baselines import run_baseline
from .streams import (
    ErmHinge,
    ErmLasso,
    ErmLogistic,
    FixedLinear,
    LossStream,
    QuadraticBox,
    RandomLinear,
    SlowlyVaryingLinear,
    generate_stream,
)

__all__ = [
    "ErmHinge",
    "ErmLasso",
    "ErmLogistic",
    "FixedLinear",
    "LossStream",
    "QuadraticBox",
    "RandomLinear",
    "SlowlyVaryingLinear",
    "generate_stream",
    "run_baseline",
]
