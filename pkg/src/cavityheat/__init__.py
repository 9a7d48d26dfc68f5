"""Steady-state heat transport in boundary-driven coupled cavity arrays.

Three mutually cross-validating computational paths:

- ``closedform``: exact closed-form moments, currents, switch classification,
  and rectification for the two-cavity system;
- ``moments``: direct linear solve and time integration of the closed
  moment equations (two cavities), and ``chain`` for N-cavity arrays via the
  block equation of motion;
- ``fockspace``: a brute-force Lindbladian oracle on a truncated Fock space.

``cli`` exposes named sweep experiments with CSV/JSON output.
"""

from .model import (
    ArraySystem,
    AtomSpec,
    ReservoirSpec,
    SolverError,
    TwoCavitySystem,
    ValidationError,
    bose_occupation,
    validate,
    validation_errors,
)
from .closedform import (
    CurrentReport,
    RectificationResult,
    SteadyMoments,
    classify_regime,
    current_general,
    current_pm,
    current_resonant_no_atom,
    current_resonant_with_atom,
    forward_reverse_currents,
    peak_rate,
    rectification,
    steady_moments,
)
from .moments import MomentTrajectory, MomentVector, currents_from_moments, evolve, generator_matrix, steady_state
from .chain import (
    BlockGenerators,
    MomentMatrix,
    array_current,
    ballistic_current,
    build_generators,
    occupation_profile,
    right_boundary_current,
    size_scan,
    steady_state_matrix,
)
from .fockspace import (
    DensityMatrix,
    FockConfig,
    build_liouvillian,
    converged_steady_rho,
    g2_zero,
    oracle_currents,
    steady_rho,
    thermal_fidelity,
    thermal_state,
)

__version__ = "0.1.0"
