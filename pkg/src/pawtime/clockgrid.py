"""Discrete clock: tick basis, conjugate frequency ladder and constraint diagnostic.

The clock window ``[-T/2, T/2]`` is sampled at ``N`` midpoint ticks
``t_j = -T/2 + (j + 1/2) T/N``. On these ticks the discrete exponentials
``exp(i t_j w_n)`` with ``w_n = 2 pi n / T`` for ``N`` consecutive integers
``n`` are exactly orthogonal, which makes the tick/frequency transform
unitary.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionMismatch, InvalidArgument


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ClockGrid:
    """Finite clock window of length ``window_T`` split into ``n_ticks`` ticks."""

    window_T: float
    n_ticks: int

    def __post_init__(self):
        if not np.isfinite(self.window_T) or self.window_T <= 0:
            raise InvalidArgument("window_T must be positive")
        if int(self.n_ticks) != self.n_ticks or self.n_ticks < 2:
            raise InvalidArgument("n_ticks must be an integer >= 2")
        object.__setattr__(self, "window_T", float(self.window_T))
        object.__setattr__(self, "n_ticks", int(self.n_ticks))

    @property
    def dt(self):
        return self.window_T / self.n_ticks

    @property
    def tick_times(self):
        j = np.arange(self.n_ticks)
        return _frozen(-0.5 * self.window_T + (j + 0.5) * self.dt)

    def nearest_tick(self, t):
        """Index of the tick closest to time ``t`` (ties go to the later tick)."""
        if t < -0.5 * self.window_T or t > 0.5 * self.window_T:
            raise InvalidArgument(f"time {t} lies outside the clock window")
        j = int(np.floor((t + 0.5 * self.window_T) / self.dt))
        return min(max(j, 0), self.n_ticks - 1)


@dataclass(frozen=True)
class FrequencyLadder:
    """Clock-energy modes ``n`` and their angular frequencies ``2 pi n / T``."""

    mode_indices: np.ndarray
    mode_frequencies: np.ndarray


def make_clock_grid(window_T, n_ticks):
    """Build a :class:`ClockGrid`, raising :class:`InvalidArgument` on bad input."""
    return ClockGrid(window_T, n_ticks)


def frequency_ladder(grid):
    n = grid.n_ticks
    modes = np.arange(-(n // 2), n - n // 2)
    return FrequencyLadder(_frozen(modes), _frozen(2.0 * np.pi * modes / grid.window_T))


def _tick_states(history, grid):
    # accepts a Trajectory, a TensorHistory or a plain (N, d) array of per-tick states
    if hasattr(history, "states"):
        states = np.asarray(history.states)
    elif hasattr(history, "amplitudes") and hasattr(history, "dim_s"):
        states = np.asarray(history.amplitudes).reshape(-1, history.dim_s) * np.sqrt(history.grid.n_ticks)
    else:
        states = np.asarray(history)
    if states.ndim == 1:
        states = states[:, None]
    if states.shape[0] != grid.n_ticks:
        raise DimensionMismatch(
            f"history has {states.shape[0]} ticks but the grid has {grid.n_ticks}"
        )
    return states.astype(np.complex128, copy=False)


def _mode_phases(grid):
    # exp(i t_j w_n) = exp(2 pi i n j / N) * exp(i pi n (1/N - 1))
    modes = frequency_ladder(grid).mode_indices
    n = grid.n_ticks
    return modes, np.exp(1j * np.pi * modes * (1.0 / n - 1.0))


def clock_fourier(history, grid):
    """Expand a history on the clock-energy modes.

    Returns an ``(N, d)`` array whose row ``r`` is the component
    ``(1/sqrt(N)) sum_j exp(i t_j w_n) psi(t_j)`` for mode
    ``n = frequency_ladder(grid).mode_indices[r]``.
    """
    states = _tick_states(history, grid)
    n = grid.n_ticks
    modes, phase = _mode_phases(grid)
    # sum_j exp(2 pi i n j / N) psi_j == N * ifft(psi)[n mod N]
    spec = np.fft.ifft(states, axis=0) * n
    return (phase[:, None] * spec[np.mod(modes, n)]) / np.sqrt(n)


def inverse_clock_fourier(components, grid):
    """Inverse of :func:`clock_fourier`: mode components back to per-tick states."""
    comps = np.asarray(components, dtype=np.complex128)
    if comps.ndim == 1:
        comps = comps[:, None]
    n = grid.n_ticks
    if comps.shape[0] != n:
        raise DimensionMismatch(f"expected {n} mode components, got {comps.shape[0]}")
    modes, phase = _mode_phases(grid)
    shifted = np.empty_like(comps)
    shifted[np.mod(modes, n)] = np.conj(phase)[:, None] * comps
    return np.fft.fft(shifted, axis=0) / np.sqrt(n)


@dataclass(frozen=True)
class ConstraintResidual:
    """Norm of the constraint operator applied to a discrete history.

    ``periodic`` is False when the two wrap-around ticks dominate the
    residual, i.e. the trajectory does not close on itself over the window.
    """

    value: float
    periodic: bool
    boundary_fraction: float
    per_tick: np.ndarray


def constraint_residual(history, hamiltonian, grid):
    """Evaluate ``|| (hbar Omega + H_s) Psi ||`` on the tick grid.

    The clock generator acts as ``-i hbar d/dt`` (so that Schroedinger
    trajectories are annihilated), with ``d/dt`` replaced by a periodic
    central difference. ``history`` must be a trajectory-like object with
    ``states`` and ``space``; the Hamiltonian's ``apply`` supplies ``H_s psi``.
    """
    states = np.ascontiguousarray(_tick_states(history, grid))
    space = getattr(history, "space", None)
    h_states = np.ascontiguousarray(hamiltonian.apply(states, space))
    if h_states.shape != states.shape:
        raise DimensionMismatch("Hamiltonian output does not match the history's system space")
    metric = space.dx if space is not None else 1.0
    per_tick = kernels.residual_sq(states, h_states, grid.dt, hamiltonian.hbar) * metric
    n = grid.n_ticks
    total = float(per_tick.sum())
    value = np.sqrt(total / n)
    boundary = float(per_tick[0] + per_tick[-1])
    interior = float(per_tick[1:-1].mean()) if n > 2 else 0.0
    periodic = boundary / 2.0 <= 10.0 * interior + 1e-300 or total == 0.0
    frac = boundary / total if total > 0 else 0.0
    return ConstraintResidual(float(value), bool(periodic), frac, _frozen(np.sqrt(per_tick)))
