"""Simulation and analysis toolkit for a three-variable recharge-oscillator
climate model with coexisting chaotic and strong-event attractors."""

from .errors import (
    ConfigError,
    DegenerateGeometry,
    InvalidBracket,
    NoConvergence,
    NoEpochs,
    NonFiniteState,
    NoReturn,
    NotSaddleFocus,
    NumericsError,
    SingularJacobian,
    StepSizeUnderflow,
    ToolkitError,
    ZeroIterate,
)
from .integrators import (
    IntegratorConfig,
    NoisePlan,
    Trajectory,
    VariationalTrajectory,
    integrate,
    integrate_sde,
    integrate_variational,
    liouville_defect,
)
from .model import (
    OMEGA_CAL,
    REFERENCE,
    EquilibriumInfo,
    Forcing,
    ModelParams,
    a_of_t,
    equilibrium_eigenstructure,
    find_equilibrium,
    flow_jacobian,
    flow_rhs,
    jacobian,
    raw_per_year,
    vector_field,
)

__version__ = "0.1.0"
