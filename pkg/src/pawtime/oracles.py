"""Reference computations kept independent of the main event-time path.

* closed-form free Gaussian evolution,
* the probability current and the flux arrival-time distribution,
* Born-rule conditionals recomputed from explicit joint projectors on the
  flat history vector,
* a generator of random finite-dimensional instances for property tests.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .clockgrid import ClockGrid
from .dynamics import FiniteMatrix, FiniteVec, PositionWave, propagate_trajectory
from .errors import DimensionMismatch, InvalidArgument, NeverOccurs, NoFlux, SizeGuardError
from .eventtime import (
    EPSILON_NEVER,
    EventTimeDistribution,
    FiniteProjector,
    SpatialInterval,
)

BRUTE_FORCE_MAX = 2**16


def free_gaussian_closed_form(params, t, x, hbar=1.0):
    """Exact free evolution of ``exp(-(x-x0)^2/(4 sigma^2) + i p0 x/hbar)``, normalized."""
    x = np.asarray(x, dtype=np.float64)
    s, m, p0 = params.sigma, params.mass, params.p0
    z = 1.0 + 1j * hbar * t / (2.0 * m * s * s)
    xc = params.x0 + p0 * t / m
    amp = (2.0 * np.pi * s * s) ** -0.25 / np.sqrt(z)
    return amp * np.exp(
        -((x - xc) ** 2) / (4.0 * s * s * z) + 1j * p0 * x / hbar - 1j * p0 * p0 * t / (2.0 * m * hbar)
    )


def _current_at(amps, space, x_d, mass, hbar):
    # evaluate the grid's Fourier interpolant and its derivative exactly at x_d
    x = np.asarray(space.x)
    if not x[0] <= x_d <= x[-1]:
        raise InvalidArgument(f"detector position {x_d} is outside the grid")
    k = np.asarray(space.k)
    coef = np.fft.fft(amps, axis=-1) / space.n_points
    phase = np.exp(1j * k * (x_d - space.x_min))
    psi = coef @ phase
    dpsi = coef @ (1j * k * phase)
    return (hbar / mass) * np.imag(np.conj(psi) * dpsi)


def probability_current(state, x_d, mass, hbar=1.0):
    """``(hbar/m) Im(psi* dpsi/dx)`` at ``x_d``; positive for rightward flow.

    Both ``psi`` and its derivative come from the grid's Fourier series, so
    ``x_d`` need not be a grid point.
    """
    if not isinstance(state, PositionWave):
        raise DimensionMismatch("probability current needs a position-grid state")
    return float(_current_at(state.amplitudes, state.grid, x_d, mass, hbar))


@dataclass(frozen=True, eq=False)
class FluxDistribution:
    """Arrival-time distribution from the positive part of the current at ``x_D``.

    ``current`` is the raw ``J(t_j)``; ``probs`` the clipped, window-normalized
    per-tick masses; ``clipped_fraction`` the share of ``sum |J|`` removed by
    clipping negative values.
    """

    grid: ClockGrid
    current: np.ndarray
    probs: np.ndarray
    x_D: float
    clipped_fraction: float

    @property
    def density(self):
        return self.probs / self.grid.dt


def current_at_detector(traj, x_d, mass, hbar=1.0):
    """Per-tick probability current ``J(x_d, t_j)`` along a trajectory."""
    if traj.space is None:
        raise DimensionMismatch("flux distribution needs a position-grid trajectory")
    return _current_at(np.asarray(traj.states), traj.space, x_d, mass, hbar)


def flux_from_current(grid, cur, x_d, epsilon=EPSILON_NEVER):
    """Clip negative current, normalize over the window, record the clipped share."""
    cur = np.asarray(cur, dtype=np.float64)
    pos = np.clip(cur, 0.0, None)
    crossed = float(pos.sum() * grid.dt)
    if crossed < epsilon or crossed == 0.0:
        raise NoFlux(f"no positive flux at x={x_d} (crossed mass {crossed:.3e})")
    clipped = float(-np.clip(cur, None, 0.0).sum() / np.abs(cur).sum())
    return FluxDistribution(grid, cur, pos / pos.sum(), float(x_d), clipped)


def flux_arrival_distribution(traj, x_d, mass, hbar=1.0, epsilon=EPSILON_NEVER):
    """Flux (current-based) arrival distribution at the point ``x_d``.

    Raises :class:`NoFlux` if the positive part of the current carries less
    than ``epsilon`` probability through ``x_d`` over the window.
    """
    return flux_from_current(traj.grid, current_at_detector(traj, x_d, mass, hbar), x_d, epsilon)


def _system_projector(p, th):
    if isinstance(p, FiniteProjector):
        if p.dim != th.dim_s:
            raise DimensionMismatch("projector does not match the history")
        return sp.csr_matrix(p.P)
    if isinstance(p, SpatialInterval):
        if th.space is None:
            raise DimensionMismatch("a spatial interval needs a position-grid history")
        # grid-metric weights: <f|P|g> = sum_i w_i f_i* g_i = dx * f^H diag(w/dx) g
        return sp.diags(p.weights(th.space) / th.space.dx)
    raise TypeError(f"unsupported projector {type(p).__name__}")


def brute_force_conditional(th, p, epsilon_never=EPSILON_NEVER):
    """Bayes conditional from ``<Psi|Pi_j|Psi>`` with explicit ``Pi_j = |j><j| (x) P``."""
    n, d = th.grid.n_ticks, th.dim_s
    if n * d > BRUTE_FORCE_MAX:
        raise SizeGuardError(f"N*d = {n * d} exceeds the brute-force limit {BRUTE_FORCE_MAX}")
    psi = np.asarray(th.amplitudes)
    p_sys = _system_projector(p, th)
    joint = np.empty(n)
    for j in range(n):
        ej = sp.csr_matrix(([1.0], ([j], [j])), shape=(n, n))
        pi_j = sp.kron(ej, p_sys, format="csr")
        joint[j] = th.metric * np.vdot(psi, pi_j @ psi).real
    total = joint.sum()
    if total < epsilon_never:
        raise NeverOccurs("event never occurs in the window", total_mass=float(total))
    probs = joint / total
    return EventTimeDistribution(th.grid, probs, th.grid.window_T * total, total, th.grid.window_T)


# --- random instances -------------------------------------------------------


def haar_state(rng, d):
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_hermitian(rng, d, radius):
    """Random Hermitian matrix rescaled to spectral radius ``radius``."""
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = 0.5 * (a + a.conj().T)
    r = np.max(np.abs(np.linalg.eigvalsh(h)))
    return h * (radius * rng.uniform(0.2, 1.0) / r) if r > 0 else h


def random_projector(rng, d, rank=None):
    rank = int(rng.integers(1, d + 1)) if rank is None else rank
    vecs = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    return FiniteProjector.onto(vecs)


def random_instance(rng, d_max=4, n_max=64, window_T=None):
    """Random (trajectory, projector) pair with dynamics resolved by the tick grid.

    The Hamiltonian's spectral radius is at most ``4 pi / T``.
    """
    d = int(rng.integers(1, d_max + 1))
    n = int(rng.integers(2, n_max + 1))
    T = float(rng.uniform(0.5, 20.0)) if window_T is None else window_T
    grid = ClockGrid(T, n)
    h = FiniteMatrix(random_hermitian(rng, d, 4 * np.pi / T))
    traj = propagate_trajectory(FiniteVec(haar_state(rng, d)), h, grid)
    return traj, random_projector(rng, d), h
