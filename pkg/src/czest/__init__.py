"""Guaranteed set-valued state estimation with constrained zonotopes."""

from .intervals import Interval, IntervalMatrix, IntervalVector
from .sets import ConstrainedZonotope, eliminate_constraints, reduce_generators

__all__ = [
    "Interval",
    "IntervalMatrix",
    "IntervalVector",
    "ConstrainedZonotope",
    "eliminate_constraints",
    "reduce_generators",
]

__version__ = "0.1.0"
