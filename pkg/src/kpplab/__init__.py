"""Monte Carlo laboratory for the KPP equation with noise.

Lattice solver for the generalized equation with immigration, annihilation
and overcrowding terms; exact monotone couplings; a rescaled long-range
contact process with shared-clock comparisons; front-marker speed
estimators; and Monte Carlo duality checks.
"""

__version__ = "0.1.0"

from .errors import InvariantViolation, KpplabError, UsageError
from .field import (Bump, Custom, Field, Heavyside, InitialCondition,
                    SplitHeavyside, ZetaRamp, ZetaRampPlus, in_M, in_class_H,
                    lambda_norm, left_marker, pairing, reflect, render,
                    resample, right_marker, shift)
from .integrator import (GridSpec, NoiseStream, SpdeParams, Trajectory,
                         extinction_probability, simulate, simulate_batch,
                         step, white_noise_increment)

__all__ = [
    "__version__",
    "InvariantViolation", "KpplabError", "UsageError",
    "Bump", "Custom", "Field", "Heavyside", "InitialCondition",
    "SplitHeavyside", "ZetaRamp", "ZetaRampPlus",
    "in_M", "in_class_H", "lambda_norm", "left_marker", "pairing",
    "reflect", "render", "resample", "right_marker", "shift",
    "GridSpec", "NoiseStream", "SpdeParams", "Trajectory",
    "extinction_probability", "simulate", "simulate_batch", "step",
    "white_noise_increment",
]
