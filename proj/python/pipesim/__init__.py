"""Analytic model and schedule simulator for pipeline/data/tensor-parallel
transformer training."""

from ._pipesim import *  # noqa: F401,F403
from ._pipesim import __doc__ as _doc

__doc__ = _doc
__version__ = "0.1.0"
