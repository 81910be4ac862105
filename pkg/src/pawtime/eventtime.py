"""Event-time statistics from a history: joint masses, Bayes conditioning, moments.

For a trajectory ``psi(t_j)`` on an ``N``-tick clock and an event projector
``P``, the clock-tick POVM element ``|t_j><t_j| (x) P`` has Born-rule mass

    q_j = (dt / T) <psi(t_j)| P |psi(t_j)> = <psi(t_j)| P |psi(t_j)> / N

and the conditional distribution of the clock reading given the event is
``q_j / sum_k q_k``. All distributions are stored as per-tick masses.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .dynamics import FiniteVec, PositionGrid, PositionWave, normalized
from .errors import DimensionMismatch, InvalidArgument, NeverOccurs

EPSILON_NEVER = 1e-12
_OVERSHOOT = 1e-9


@dataclass(frozen=True)
class SpatialInterval:
    """Detector region ``[d_lo, d_hi]`` on the position line."""

    d_lo: float
    d_hi: float

    def __post_init__(self):
        if not self.d_lo < self.d_hi:
            raise InvalidArgument("interval requires d_lo < d_hi")

    def weights(self, space):
        """Trapezoid quadrature weights (including ``dx``) of the grid points inside."""
        x = np.asarray(space.x)
        tol = 1e-9 * space.dx
        inside = np.flatnonzero((x >= self.d_lo - tol) & (x <= self.d_hi + tol))
        w = np.zeros(space.n_points)
        if inside.size == 1:
            w[inside] = space.dx
        elif inside.size > 1:
            w[inside] = space.dx
            w[inside[0]] = w[inside[-1]] = 0.5 * space.dx
        return w


@dataclass(frozen=True, eq=False)
class FiniteProjector:
    """Explicit Hermitian idempotent on a finite system space."""

    P: np.ndarray

    def __post_init__(self):
        p = np.array(self.P, dtype=np.complex128)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise DimensionMismatch("projector must be a square matrix")
        if np.max(np.abs(p - p.conj().T)) > 1e-12:
            raise InvalidArgument("projector must be Hermitian")
        if np.max(np.abs(p @ p - p)) > 1e-12:
            raise InvalidArgument("projector must be idempotent")
        p.setflags(write=False)
        object.__setattr__(self, "P", p)

    @property
    def dim(self):
        return self.P.shape[0]

    @classmethod
    def onto(cls, vectors):
        """Projector onto the span of the given (column) vectors."""
        v = np.atleast_2d(np.asarray(vectors, dtype=np.complex128))
        if v.shape[0] == 1 and v.shape[1] > 1:
            v = v.T
        q, _ = np.linalg.qr(v)
        return cls(q @ q.conj().T)


def _clamp(values):
    lo, hi = values.min(initial=0.0), values.max(initial=0.0)
    if lo < -_OVERSHOOT or hi > 1 + _OVERSHOOT:
        raise InvalidArgument(
            f"event probability {lo if lo < 0 else hi:.3e} lies outside [0, 1]; "
            "is the state normalized?"
        )
    return np.clip(values, 0.0, 1.0)


def _probabilities(states, space, p):
    if isinstance(p, SpatialInterval):
        if space is None:
            raise DimensionMismatch("a spatial interval needs position-grid states")
        return _clamp(kernels.weighted_abs2(states, p.weights(space)))
    if isinstance(p, FiniteProjector):
        if space is not None or states.shape[1] != p.dim:
            raise DimensionMismatch("projector dimension does not match the system")
        vals = np.einsum("ji,ik,jk->j", states.conj(), p.P, states).real
        return _clamp(vals)
    raise TypeError(f"unsupported projector {type(p).__name__}")


def event_probability_at(state, p):
    """``<psi| P |psi>`` for a single system state."""
    if isinstance(state, PositionWave):
        space = state.grid
    elif isinstance(state, FiniteVec):
        space = None
    else:
        raise TypeError("expected a PositionWave or FiniteVec")
    return float(_probabilities(state.amplitudes[None, :], space, p)[0])


def event_probabilities(traj, p):
    """Per-tick ``<psi(t_j)| P |psi(t_j)>`` over a trajectory."""
    return _probabilities(traj.states, traj.space, p)


def joint_probability(traj, p):
    """Discrete joint masses ``p(t_j, event) = (dt/T) <psi(t_j)|P|psi(t_j)>``."""
    return event_probabilities(traj, p) / traj.grid.n_ticks


@dataclass(frozen=True, eq=False)
class EventTimeDistribution:
    """Conditional clock distribution given that the event happens.

    ``probs`` are per-tick masses summing to one over the window;
    ``density`` divides by the tick spacing.
    """

    grid: object
    probs: np.ndarray
    dwell_time: float
    arrival_probability: float
    window_T: float

    @property
    def tick_times(self):
        return self.grid.tick_times

    @property
    def density(self):
        return self.probs / self.grid.dt


def distribution_from_joint(grid, q, epsilon_never=EPSILON_NEVER):
    """Bayes-normalize joint masses ``q`` into an :class:`EventTimeDistribution`."""
    q = np.asarray(q, dtype=np.float64)
    total = float(q.sum())
    if total < epsilon_never:
        raise NeverOccurs(
            f"event probability over the window is {total:.3e} (< {epsilon_never:g})",
            total_mass=total,
        )
    probs = q / total
    probs.setflags(write=False)
    return EventTimeDistribution(grid, probs, grid.window_T * total, total, grid.window_T)


def arrival_distribution(traj, p, epsilon_never=EPSILON_NEVER):
    """Conditional distribution of the clock reading given the event ``p``.

    Raises :class:`NeverOccurs` when the total joint mass is below
    ``epsilon_never``.
    """
    return distribution_from_joint(traj.grid, joint_probability(traj, p), epsilon_never)


def dwell_time(traj, p):
    return float(traj.grid.window_T * joint_probability(traj, p).sum())


def not_arrived_probability(traj, p):
    """Mass of the complementary POVM element ``1 - sum_j Pi_j``."""
    return float(1.0 - joint_probability(traj, p).sum())


def arrival_observable_expectation(traj, p, lam=0.0):
    """Expectation of the arrival observable with not-arrived eigenvalue ``lam``.

    This mixes the arrival time with ``lam`` weighted by the no-arrival
    probability, so it is not the mean arrival time; see
    :func:`vector_observable` for that.
    """
    q = joint_probability(traj, p)
    return float(np.dot(traj.grid.tick_times, q) + lam * (1.0 - q.sum()))


@dataclass(frozen=True)
class VectorObservableResult:
    mean_T1: float
    mean_T2: float
    alpha: float
    t_ev: float
    var_t_ev: float


def moments_from_joint(grid, q, epsilon_never=EPSILON_NEVER):
    """Vector-observable moments from per-tick joint masses ``q``."""
    q = np.asarray(q, dtype=np.float64)
    total = float(q.sum())
    if total < epsilon_never:
        raise NeverOccurs(
            "event never occurs in the window: alpha is infinite", total_mass=total
        )
    t = np.asarray(grid.tick_times)
    mean_t1 = float(np.dot(t, q))
    alpha = 1.0 / total
    probs = q / total
    t_ev = float(np.dot(t, probs))
    if abs(t_ev - alpha * mean_t1) > 1e-12 * grid.window_T:
        raise ArithmeticError("t_ev disagrees with alpha * <T1>")
    var = float(alpha * np.dot(t * t, q) - t_ev * t_ev)
    # rounding can push 1 - total a few ulp outside [0, 1]
    mean_t2 = min(max(1.0 - total, 0.0), 1.0)
    return VectorObservableResult(mean_t1, mean_t2, alpha, t_ev, var)


def vector_observable(traj, p, epsilon_never=EPSILON_NEVER):
    """Moments of the two-component time observable and the mean event time.

    ``alpha`` is the Bayes factor ``1 / sum_k q_k``, so that
    ``t_ev = alpha <T1>`` and ``var_t_ev = alpha <T1^2> - t_ev^2``.
    ``mean_T2`` is the no-event probability.
    """
    return moments_from_joint(traj.grid, joint_probability(traj, p), epsilon_never)


def condition_on_time(traj, j):
    """System state given that the clock reads ``t_j``."""
    if not 0 <= j < traj.n_ticks:
        raise IndexError(f"tick index {j} out of range [0, {traj.n_ticks})")
    return normalized(traj.state(j))


__all__ = [
    "EPSILON_NEVER",
    "EventTimeDistribution",
    "FiniteProjector",
    "PositionGrid",
    "SpatialInterval",
    "VectorObservableResult",
    "arrival_distribution",
    "arrival_observable_expectation",
    "condition_on_time",
    "distribution_from_joint",
    "dwell_time",
    "event_probabilities",
    "event_probability_at",
    "joint_probability",
    "moments_from_joint",
    "not_arrived_probability",
    "vector_observable",
]
