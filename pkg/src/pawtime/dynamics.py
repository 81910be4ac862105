"""System spaces, Hamiltonians and unitary propagation.

Two kinds of system are supported: a wavefunction on a uniform periodic
1-D position grid (:class:`PositionWave`) and a finite-dimensional state
vector (:class:`FiniteVec`). Position-grid dynamics are spectral: free
motion is an exact phase in momentum space, a potential is handled by
Strang splitting.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .clockgrid import ClockGrid
from .errors import DimensionMismatch, InvalidArgument, PropagationError


class GridMarginWarning(UserWarning):
    """A wavepacket (or its evolution) comes too close to the grid edge."""


def _frozen(a, dtype=None):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PositionGrid:
    """Periodic grid ``x_i = x_min + i dx`` with ``dx = (x_max - x_min) / M``."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise InvalidArgument("x_max must exceed x_min")
        m = int(self.n_points)
        if m != self.n_points or m < 2 or m & (m - 1):
            raise InvalidArgument("n_points must be a power of two >= 2")
        object.__setattr__(self, "n_points", m)

    @property
    def dx(self):
        return (self.x_max - self.x_min) / self.n_points

    @property
    def x(self):
        return _frozen(self.x_min + np.arange(self.n_points) * self.dx)

    @property
    def k(self):
        """Angular wavenumbers in numpy FFT order."""
        return _frozen(2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx))


@dataclass(frozen=True, eq=False)
class PositionWave:
    grid: PositionGrid
    amplitudes: np.ndarray

    def __post_init__(self):
        a = _frozen(self.amplitudes, np.complex128)
        if a.shape != (self.grid.n_points,):
            raise DimensionMismatch("amplitudes do not match the position grid")
        object.__setattr__(self, "amplitudes", a)

    @property
    def dim(self):
        return self.grid.n_points

    @property
    def space(self):
        return self.grid

    def norm(self):
        return float(np.sqrt(self.grid.dx * np.sum(np.abs(self.amplitudes) ** 2)))


@dataclass(frozen=True, eq=False)
class FiniteVec:
    amplitudes: np.ndarray

    def __post_init__(self):
        a = _frozen(self.amplitudes, np.complex128)
        if a.ndim != 1 or a.size == 0:
            raise DimensionMismatch("a finite state must be a non-empty 1-D vector")
        object.__setattr__(self, "amplitudes", a)

    @property
    def dim(self):
        return self.amplitudes.shape[0]

    @property
    def space(self):
        return None

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))


def make_state(amplitudes, space=None):
    """Wrap raw amplitudes as the state type matching ``space``."""
    if space is None:
        return FiniteVec(amplitudes)
    return PositionWave(space, amplitudes)


def inner(a, b):
    """Inner product ``<a|b>`` with the grid metric for position states."""
    if a.dim != b.dim or type(a) is not type(b):
        raise DimensionMismatch("states live on different spaces")
    metric = a.grid.dx if isinstance(a, PositionWave) else 1.0
    return complex(metric * np.vdot(a.amplitudes, b.amplitudes))


def normalized(state):
    n = state.norm()
    if n == 0:
        raise InvalidArgument("cannot normalize the zero vector")
    return make_state(state.amplitudes / n, state.space)


def fidelity(a, b):
    """``|<a|b>|`` for normalized states."""
    return abs(inner(a, b))


def mean_position(state):
    p = np.abs(state.amplitudes) ** 2 * state.grid.dx
    return float(np.sum(state.grid.x * p))


def position_spread(state):
    p = np.abs(state.amplitudes) ** 2 * state.grid.dx
    x = state.grid.x
    mu = np.sum(x * p)
    return float(np.sqrt(np.sum((x - mu) ** 2 * p)))


def mean_momentum(state, hbar=1.0):
    """Spectral estimate ``hbar sum_k k |phi_k|^2 / sum_k |phi_k|^2``."""
    phi = np.abs(np.fft.fft(state.amplitudes)) ** 2
    return float(hbar * np.sum(state.grid.k * phi) / np.sum(phi))


# --- Hamiltonians -----------------------------------------------------------


@dataclass(frozen=True)
class FreeParticle:
    mass: float
    hbar: float = 1.0

    def __post_init__(self):
        if self.mass <= 0 or self.hbar <= 0:
            raise InvalidArgument("mass and hbar must be positive")

    def kinetic(self, space):
        return self.hbar**2 * np.asarray(space.k) ** 2 / (2.0 * self.mass)

    def apply(self, states, space):
        if space is None:
            raise DimensionMismatch("a particle Hamiltonian needs a position grid")
        return np.fft.ifft(np.fft.fft(states, axis=-1) * self.kinetic(space), axis=-1)


@dataclass(frozen=True, eq=False)
class PotentialGrid:
    mass: float
    V: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        if self.mass <= 0 or self.hbar <= 0:
            raise InvalidArgument("mass and hbar must be positive")
        v = np.asarray(self.V)
        if np.iscomplexobj(v) and np.max(np.abs(v.imag)) > 0:
            raise InvalidArgument("potential must be real")
        object.__setattr__(self, "V", _frozen(np.real(v), np.float64))

    kinetic = FreeParticle.kinetic

    def apply(self, states, space):
        if space is None or self.V.shape != (space.n_points,):
            raise DimensionMismatch("potential does not match the position grid")
        kin = np.fft.ifft(np.fft.fft(states, axis=-1) * self.kinetic(space), axis=-1)
        return kin + self.V * states


@dataclass(frozen=True, eq=False)
class FiniteMatrix:
    H: np.ndarray
    hbar: float = 1.0
    _eig: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        h = _frozen(self.H, np.complex128)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise DimensionMismatch("H must be a square matrix")
        if np.max(np.abs(h - h.conj().T)) > 1e-12:
            raise InvalidArgument("H must be Hermitian")
        if self.hbar <= 0:
            raise InvalidArgument("hbar must be positive")
        object.__setattr__(self, "H", h)
        energies, vecs = np.linalg.eigh(h)
        object.__setattr__(self, "_eig", (energies, vecs))

    @property
    def dim(self):
        return self.H.shape[0]

    @property
    def energies(self):
        return self._eig[0]

    @property
    def eigenvectors(self):
        return self._eig[1]

    def apply(self, states, space=None):
        if states.shape[-1] != self.dim:
            raise DimensionMismatch("H does not match the state dimension")
        return states @ self.H.T

    def propagator(self, dt):
        e, v = self._eig
        return (v * np.exp(-1j * e * dt / self.hbar)) @ v.conj().T


def harmonic_potential(space, mass, omega, center=0.0):
    x = np.asarray(space.x)
    return 0.5 * mass * omega**2 * (x - center) ** 2


@dataclass(frozen=True)
class GaussianParams:
    x0: float
    p0: float
    sigma: float
    mass: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidArgument("sigma must be positive")
        if not self.mass > 0:
            raise InvalidArgument("mass must be positive")


def gaussian_packet(params, x_min, x_max, n_points, hbar=1.0):
    """Discretized, normalized ``exp(-(x-x0)^2/(4 sigma^2) + i p0 x / hbar)``.

    Emits :class:`GridMarginWarning` if the packet centre is closer than
    five widths to either grid edge.
    """
    space = PositionGrid(x_min, x_max, n_points)
    x0, s = params.x0, params.sigma
    if x0 - 5 * s < x_min or x0 + 5 * s > x_max:
        warnings.warn(
            f"packet at x0={x0} with sigma={s} is within 5 sigma of the grid edge",
            GridMarginWarning,
            stacklevel=2,
        )
    x = np.asarray(space.x)
    psi = np.exp(-((x - x0) ** 2) / (4 * s * s) + 1j * params.p0 * x / hbar)
    psi /= np.sqrt(space.dx * np.sum(np.abs(psi) ** 2))
    return PositionWave(space, psi)


def boundary_mass(state, n_edge=5):
    """Probability within ``n_edge`` grid points of either edge of the periodic grid."""
    p = np.abs(state.amplitudes) ** 2 * state.grid.dx
    return float(p[:n_edge].sum() + p[-n_edge:].sum())


# --- propagation ------------------------------------------------------------


def _check_pair(state, h):
    if isinstance(h, FiniteMatrix):
        if not isinstance(state, FiniteVec) or state.dim != h.dim:
            raise DimensionMismatch("finite Hamiltonian needs a finite state of equal dimension")
    elif isinstance(h, (FreeParticle, PotentialGrid)):
        if not isinstance(state, PositionWave):
            raise DimensionMismatch("particle Hamiltonian needs a position-grid state")
        if isinstance(h, PotentialGrid) and h.V.shape != (state.dim,):
            raise DimensionMismatch("potential does not match the position grid")
    else:
        raise TypeError(f"unsupported Hamiltonian {type(h).__name__}")


class _SplitStep:
    """Strang split-step propagator for a fixed step, reused across calls."""

    def __init__(self, h, space, dt, dt_max):
        n_sub = 1 if dt_max is None else max(1, int(np.ceil(abs(dt) / dt_max - 1e-12)))
        tau = dt / n_sub
        self.n_sub = n_sub
        self.half_v = np.exp(-0.5j * tau * h.V / h.hbar)
        self.full_v = self.half_v * self.half_v
        self.kin = np.exp(-1j * tau * h.kinetic(space) / h.hbar)

    def __call__(self, psi):
        psi = np.array(psi, dtype=np.complex128)
        kernels.multiply_inplace(psi, self.half_v)
        for s in range(self.n_sub):
            phi = np.fft.fft(psi)
            kernels.multiply_inplace(phi, self.kin)
            psi = np.fft.ifft(phi)
            kernels.multiply_inplace(psi, self.full_v if s < self.n_sub - 1 else self.half_v)
        return psi


def evolve(state, h, dt, dt_max=None):
    """Apply ``exp(-i H dt / hbar)`` to ``state``.

    ``dt_max`` bounds the split-step substep for :class:`PotentialGrid`;
    when omitted a single Strang step of length ``dt`` is taken.
    """
    _check_pair(state, h)
    if dt == 0:
        return state
    a = state.amplitudes
    if isinstance(h, FiniteMatrix):
        return FiniteVec(h.propagator(dt) @ a)
    space = state.grid
    if isinstance(h, FreeParticle):
        phase = np.exp(-1j * dt * h.kinetic(space) / h.hbar)
        return PositionWave(space, np.fft.ifft(np.fft.fft(a) * phase))
    return PositionWave(space, _SplitStep(h, space, dt, dt_max)(a))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Per-tick states ``U(t_j) anchor`` over a clock window.

    ``states`` is an ``(N, dim)`` complex array; ``space`` is the position
    grid for particle systems and ``None`` for finite ones.
    """

    grid: ClockGrid
    states: np.ndarray
    space: PositionGrid | None = None
    anchor: object = None
    norm_drift: float = 0.0

    def __post_init__(self):
        s = np.array(self.states, dtype=np.complex128, order="C")
        if s.ndim != 2 or s.shape[0] != self.grid.n_ticks:
            raise DimensionMismatch("states must have shape (n_ticks, dim)")
        if self.space is not None and s.shape[1] != self.space.n_points:
            raise DimensionMismatch("states do not match the position grid")
        s.setflags(write=False)
        object.__setattr__(self, "states", s)

    @property
    def n_ticks(self):
        return self.grid.n_ticks

    @property
    def dim(self):
        return self.states.shape[1]

    @property
    def metric(self):
        return self.space.dx if self.space is not None else 1.0

    def state(self, j):
        return make_state(self.states[j], self.space)

    def norms(self):
        w = np.full(self.dim, self.metric)
        return np.sqrt(kernels.weighted_abs2(self.states, w))

    def with_states(self, states):
        return Trajectory(self.grid, states, self.space, self.anchor, self.norm_drift)


def trajectory_from_states(grid, states, space=None):
    """Wrap externally computed per-tick states (e.g. analytic ones) as a trajectory."""
    return Trajectory(grid, states, space)


def propagate_trajectory(anchor, h, grid, dt_max=None, drift_tol=1e-6):
    """Evolve ``anchor`` (the state at ``t = 0``) to every tick of ``grid``.

    Finite and free-particle dynamics are evaluated exactly at each tick.
    Potentials are stepped sequentially outward from ``t = 0`` in both
    directions with Strang substeps no longer than ``dt_max`` (default
    ``grid.dt / 8``). Raises :class:`PropagationError` naming the first tick
    whose norm drifts from the anchor's by more than ``drift_tol``.
    """
    _check_pair(anchor, h)
    n0 = anchor.norm()
    if abs(n0 - 1.0) > 1e-9:
        raise InvalidArgument(f"anchor state is not normalized (norm {n0})")
    t = np.asarray(grid.tick_times)
    a = anchor.amplitudes
    space = anchor.space
    if isinstance(h, FiniteMatrix):
        e, v = h._eig
        coeff = v.conj().T @ a
        states = (np.exp(-1j * np.outer(t, e) / h.hbar) * coeff) @ v.T
    elif isinstance(h, FreeParticle):
        phi = np.fft.fft(a)
        kin = h.kinetic(space)
        states = np.fft.ifft(np.exp(-1j * np.outer(t, kin) / h.hbar) * phi, axis=1)
    else:
        if dt_max is None:
            dt_max = grid.dt / 8.0
        states = np.empty((grid.n_ticks, anchor.dim), dtype=np.complex128)
        j0 = int(np.searchsorted(t, 0.0))  # first tick with t >= 0
        if j0 < grid.n_ticks:
            psi = _SplitStep(h, space, t[j0], dt_max)(a) if t[j0] != 0 else np.array(a)
            states[j0] = psi
            fwd = _SplitStep(h, space, grid.dt, dt_max)
            for j in range(j0 + 1, grid.n_ticks):
                psi = fwd(psi)
                states[j] = psi
        if j0 > 0:
            psi = _SplitStep(h, space, t[j0 - 1], dt_max)(a)
            states[j0 - 1] = psi
            bwd = _SplitStep(h, space, -grid.dt, dt_max)
            for j in range(j0 - 2, -1, -1):
                psi = bwd(psi)
                states[j] = psi
    states = np.ascontiguousarray(states)
    norms = np.sqrt(kernels.weighted_abs2(states, np.full(anchor.dim, _metric(space))))
    drift = np.abs(norms - n0)
    bad = np.flatnonzero(drift > drift_tol)
    if bad.size:
        j = int(bad[0])
        raise PropagationError(f"norm drift {drift[j]:.3e} at tick {j} (t={t[j]:.6g})", tick=j)
    return Trajectory(grid, states, space, anchor, float(drift.max()))


def _metric(space):
    return space.dx if space is not None else 1.0
