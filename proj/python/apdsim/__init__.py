"""Geiger-mode APD saturation model.

Recovery dynamics of passively quenched detectors, Monte Carlo duty-cycle
tables, accidental-coincidence correction, and fringe visibility analysis.
All numerics live in the compiled extension; this package re-exports it.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
