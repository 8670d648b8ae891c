"""Gaussian dynamics of a three-oscillator chain between two thermal baths.

Exact unitary evolution with finite discretised baths, local and global GKSL
semigroups, their steady states, and Gaussian fidelity comparisons.
"""

__version__ = "0.1.0"

from .bath import DiscretizedBath, SpectralDensity, discretize, evaluate, lamb_shift
from .errors import (
    ChainError,
    ConfigError,
    IllConditionedError,
    InvalidArgumentError,
    InvalidStateError,
    NonUniqueSteadyStateError,
    NumericalError,
    NumericalSingularityError,
    SingularityError,
    TruncationError,
)
from .exact import JointSystem, assemble, evolve_joint, exact_channel, initial_joint_state, propagator
from .gaussian import (
    GaussianState,
    analytic_equal_temp_fidelity,
    basis_change,
    fidelity,
    partial_trace,
    symplectic_eigenvalues,
    thermal_occupation,
    thermal_state,
    vacuum_state,
)
from .markov import (
    RateSpec,
    SemigroupGenerator,
    generic_generator,
    global_generator,
    global_steady_analytic,
    local_generator,
    normal_mode_transform,
    propagate,
    steady_state,
)
from .params import ChainParams
from .perturbative import perturbative_local_steady, x_parameter
