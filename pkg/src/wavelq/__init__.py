"""LQ-optimal boundary control of networks of waves.

The plant is converted into an exact discrete-time system whose operators
are plain matrices; Riccati equations for those matrices give the optimal
boundary feedback, and the closed loop is simulated by matrix recursion on
spatial profiles.
"""

from .control import LqSolution, closed_loop, feedback_gain, optimal_cost, synthesize
from .discretize import (
    ClockTables,
    DiscreteProfile,
    DiscreteSystem,
    Discretization,
    build_clock,
    build_discrete,
    discretize_system,
    index_signal,
    invert_k,
    lift_initial_condition,
)
from .errors import (
    GridMismatchError,
    InstabilityError,
    IntegrationError,
    NotOptimizableError,
    RiccatiFault,
    SchemaError,
    WaveLQError,
    WellPosednessError,
)
from .model import (
    HyperbolicSystem,
    MatrixField,
    ScalarField,
    SpatialGrid,
    StateProfile,
    ValidationReport,
    load_system,
    sample_at,
    save_system,
    system_to_dict,
    validate_system,
)
from .riccati import (
    LyapunovSolution,
    RiccatiSolution,
    care_residual,
    fare_residual,
    solve_care,
    solve_fare,
    solve_input_lyapunov,
    solve_output_lyapunov,
    spectral_radius,
)
from .sim import (
    Trajectory,
    boundary_control_signal,
    cost_discrete,
    reconstruct_profile,
    simulate_closed_loop,
    simulate_open_loop,
    step,
    to_original_variables,
)
from .transform import TransformData, build_transform, solve_P, solve_Q, to_transport_form

__version__ = "0.1.0"
