"""tvmrf: exact solution paths for time-varying Markov random fields.

The estimation problem decomposes into independent scalar problems, one per
canonical-parameter coordinate, each solved exactly for every value of the
sparsity level by dynamic programming (:mod:`tvmrf.dp`).  Gaussian and
discrete front ends build the per-coordinate box constraints from data
(:mod:`tvmrf.gaussian`, :mod:`tvmrf.discrete`), optionally after kernel
averaging of the sufficient statistics (:mod:`tvmrf.smoothing`).
:mod:`tvmrf.synth` generates reference instances, :mod:`tvmrf.metrics`
scores estimates and cross-validates over the path, :mod:`tvmrf.pathio`
defines the CSV interchange formats, and :mod:`tvmrf.cli` ties everything
into the ``tvmrf`` command.
"""

from ._accel import NUMBA_ENABLED
from .dp import (
    CardinalityPath,
    CoordinateProblem,
    EnvelopeCell,
    FixedGammaSolution,
    bar_to_gamma,
    gamma_to_bar,
    solve_fixed_gamma,
    solve_parametric,
    solve_parametric_batch,
)

__version__ = "0.1.0"

__all__ = [
    "NUMBA_ENABLED",
    "CardinalityPath",
    "CoordinateProblem",
    "EnvelopeCell",
    "FixedGammaSolution",
    "bar_to_gamma",
    "gamma_to_bar",
    "solve_fixed_gamma",
    "solve_parametric",
    "solve_parametric_batch",
    "__version__",
]
