"""Atomic system definition and unit conventions.

The ladder system g -> e -> f is characterized by the inverse lifetimes
``gamma_e`` and ``gamma_f`` of the intermediate and final states and by the
two carrier detunings ``delta1`` (lower transition) and ``delta2`` (upper
transition). All rates and frequencies share one inverse-time unit; the
conventional internal choice is gamma_f = 1.
"""

from dataclasses import dataclass, replace

import numpy as np


class InvalidRateError(ValueError):
    """Raised when a decay rate is not strictly positive."""


@dataclass(frozen=True)
class Atom:
    """Ladder three-level atom: decay rates and detunings (angular units)."""

    gamma_e: float
    gamma_f: float
    delta1: float = 0.0
    delta2: float = 0.0

    def __post_init__(self):
        if not (self.gamma_e > 0 and self.gamma_f > 0):
            raise InvalidRateError(
                f"decay rates must be positive, got gamma_e={self.gamma_e}, "
                f"gamma_f={self.gamma_f}"
            )
        for name in ("gamma_e", "gamma_f", "delta1", "delta2"):
            if not np.isfinite(getattr(self, name)):
                raise InvalidRateError(f"{name} must be finite")

    @property
    def resonant(self):
        return self.delta1 == 0.0 and self.delta2 == 0.0

    @property
    def ratio(self):
        """Lifetime ratio gamma_e / gamma_f."""
        return self.gamma_e / self.gamma_f


def dimensionless(atom: Atom) -> Atom:
    """Rescale the atom so that gamma_f = 1 (all rates divided by gamma_f).

    Times in downstream results are then expressed in units of 1/gamma_f and
    rates in units of gamma_f. Pure function; the input is unchanged.
    """
    g = atom.gamma_f
    return replace(
        atom,
        gamma_e=atom.gamma_e / g,
        gamma_f=1.0,
        delta1=atom.delta1 / g,
        delta2=atom.delta2 / g,
    )


@dataclass(frozen=True)
class TimeWindow:
    """Evaluation window [t_start, t_end] sampled at n_samples points.

    ``t_start`` may stand for a truncated -infinity; the producing code is
    responsible for placing it far enough below the support of interest.
    """

    t_start: float
    t_end: float
    n_samples: int = 400

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise ValueError("t_start must be < t_end")
        if self.n_samples < 2:
            raise ValueError("n_samples must be >= 2")

    def grid(self):
        return np.linspace(self.t_start, self.t_end, self.n_samples)

    @property
    def span(self):
        return self.t_end - self.t_start
