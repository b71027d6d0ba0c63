"""Finitely convergent circumcenter-type methods for convex feasibility problems."""

from .errors import (
    CannotEscape,
    DegenerateConfiguration,
    DimensionMismatch,
    EmptyResults,
    FeaskitError,
    InvalidParams,
    MismatchedTermination,
    ParseError,
    ZeroSubgradientAtViolation,
)
from .geometry import Halfspace, circumcenter3, project_halfspace, reflect
from .problem import (
    AffineOracle,
    CfpInstance,
    ConvexInequalityOracle,
    Ellipsoid,
    GenParams,
    generate_ellipsoid_instance,
    is_feasible,
    max_violation,
    read_instance,
    sample_infeasible_start,
    write_instance,
)
from .schedules import PowerLaw, Zero, epsilon, parse_schedule
from .solvers import (
    Algorithm,
    SolveReport,
    SolverConfig,
    Status,
    StepRecord,
    cyclic_step,
    paca_step,
    run,
    simultaneous_step,
)

__version__ = "0.1.0"
