"""Event-time distributions from clock-conditioned history states."""

from .clockgrid import (
    ClockGrid,
    FrequencyLadder,
    clock_fourier,
    constraint_residual,
    frequency_ladder,
    inverse_clock_fourier,
    make_clock_grid,
)
from .dynamics import (
    FiniteMatrix,
    FiniteVec,
    FreeParticle,
    GaussianParams,
    PositionGrid,
    PositionWave,
    PotentialGrid,
    Trajectory,
    evolve,
    gaussian_packet,
    propagate_trajectory,
)
from .errors import (
    DimensionMismatch,
    InvalidArgument,
    NeverOccurs,
    NoFlux,
    PawtimeError,
    PropagationError,
    SizeGuardError,
    ValidationError,
)
from .eventtime import (
    EventTimeDistribution,
    FiniteProjector,
    SpatialInterval,
    VectorObservableResult,
    arrival_distribution,
    arrival_observable_expectation,
    condition_on_time,
    dwell_time,
    event_probability_at,
    joint_probability,
    not_arrived_probability,
    vector_observable,
)
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ClockGrid",
    "DimensionMismatch",
    "EventTimeDistribution",
    "FiniteMatrix",
    "FiniteProjector",
    "FiniteVec",
    "FreeParticle",
    "FrequencyLadder",
    "GaussianParams",
    "InvalidArgument",
    "NeverOccurs",
    "NoFlux",
    "PawtimeError",
    "PositionGrid",
    "PositionWave",
    "PotentialGrid",
    "PropagationError",
    "SizeGuardError",
    "SpatialInterval",
    "Trajectory",
    "ValidationError",
    "VectorObservableResult",
    "__version__",
    "arrival_distribution",
    "arrival_observable_expectation",
    "clock_fourier",
    "condition_on_time",
    "constraint_residual",
    "dwell_time",
    "event_probability_at",
    "evolve",
    "frequency_ladder",
    "gaussian_packet",
    "inverse_clock_fourier",
    "joint_probability",
    "make_clock_grid",
    "not_arrived_probability",
    "propagate_trajectory",
    "vector_observable",
]
