"""Two-photon excitation of a ladder three-level atom.

Numerical laboratory for the excitation probability of the final state under
two-photon and coherent drives: exact bounds, family-specific closed forms,
Schmidt/entanglement analysis, pulse-shape optimization, and sweep datasets.
"""

__version__ = "0.1.0"

from .model import Atom, TimeWindow, dimensionless

__all__ = ["Atom", "TimeWindow", "dimensionless", "__version__"]
