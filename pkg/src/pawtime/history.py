"""Explicit clock-system tensor states and their extensions.

A :class:`TensorHistory` is the flat vector of ``(1/sqrt(N)) psi_k(t_j)``
over clock (x) system. Measurement and preparation histories add a
basis-encoded memory register: index 0 is the ready state ``|r>`` and
index ``1 + a`` records outcome ``a``.
"""

from dataclasses import dataclass

import numpy as np

from .clockgrid import ClockGrid
from .dynamics import FiniteMatrix, FiniteVec, evolve
from .eventtime import (
    EPSILON_NEVER,
    FiniteProjector,
    SpatialInterval,
    distribution_from_joint,
    event_probabilities,
)
from .errors import DimensionMismatch, InvalidArgument, NeverOccurs, SizeGuardError

READY = 0
TWO_CLOCK_MAX = 4096


@dataclass(frozen=True, eq=False)
class TensorHistory:
    grid: ClockGrid
    dim_s: int
    amplitudes: np.ndarray
    space: object = None

    @property
    def metric(self):
        return self.space.dx if self.space is not None else 1.0

    def norm(self):
        return float(np.sqrt(self.metric * np.vdot(self.amplitudes, self.amplitudes).real))

    def block(self, j):
        """Unnormalized clock-projected slice ``<t_j|Psi>``."""
        d = self.dim_s
        return self.amplitudes[j * d:(j + 1) * d]


def build_tensor_history(traj):
    n = traj.n_ticks
    amps = (np.asarray(traj.states) / np.sqrt(n)).reshape(-1).copy()
    amps.setflags(write=False)
    return TensorHistory(traj.grid, traj.dim, amps, traj.space)


def born_probability(th, j, p):
    """``<Psi| (|t_j><t_j| (x) P) |Psi>`` evaluated on the flat history vector."""
    if not 0 <= j < th.grid.n_ticks:
        raise IndexError(f"tick index {j} out of range")
    b = th.block(j)
    if isinstance(p, SpatialInterval):
        if th.space is None:
            raise DimensionMismatch("a spatial interval needs a position-grid history")
        return float(np.sum(p.weights(th.space) * np.abs(b) ** 2))
    if isinstance(p, FiniteProjector):
        if p.dim != th.dim_s:
            raise DimensionMismatch("projector dimension does not match the history")
        return float(np.vdot(b, p.P @ b).real)
    raise TypeError(f"unsupported projector {type(p).__name__}")


# --- memory histories -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MemoryHistory:
    """History over clock (x) system (x) memory, stored as ``(N, dim_s, dim_m)``.

    ``t_a`` is the requested measurement time and ``tick_a`` the tick it
    was snapped to; ``t_a_snapped`` is that tick's time.
    """

    grid: ClockGrid
    dim_s: int
    dim_m: int
    t_a: float
    tick_a: int
    amplitudes: np.ndarray

    @property
    def t_a_snapped(self):
        return float(self.grid.tick_times[self.tick_a])

    @property
    def flat(self):
        return self.amplitudes.reshape(-1)

    def norm(self):
        return float(np.linalg.norm(self.flat))


def _check_basis(basis, d):
    b = np.asarray(basis, dtype=np.complex128)
    if b.shape != (d, d):
        raise DimensionMismatch(f"outcome basis must be a complete {d}x{d} set of columns")
    if np.max(np.abs(b.conj().T @ b - np.eye(d))) > 1e-10:
        raise InvalidArgument("outcome basis is not orthonormal")
    return b


def _finite_only(traj):
    if traj.space is not None:
        raise DimensionMismatch("memory histories are built for finite-dimensional systems")


def build_measurement_history(traj, t_a, outcome_basis, post_evolution):
    """History of an impulsive von Neumann measurement at clock time ``t_a``.

    Before ``t_a`` the system follows ``traj`` with memory ready. From the
    tick nearest ``t_a`` on, branch ``a`` carries
    ``<a|psi(t_a)> U(t - t_a)|a>`` with memory in ``|a>_m``; ``U`` is
    generated by ``post_evolution``. ``outcome_basis`` holds the outcome
    vectors as columns.
    """
    _finite_only(traj)
    grid, d, n = traj.grid, traj.dim, traj.n_ticks
    basis = _check_basis(outcome_basis, d)
    if not isinstance(post_evolution, FiniteMatrix) or post_evolution.dim != d:
        raise DimensionMismatch("post-measurement Hamiltonian must act on the system space")
    ja = grid.nearest_tick(t_a)
    t = np.asarray(grid.tick_times)
    amps = np.zeros((n, d, d + 1), dtype=np.complex128)
    amps[:ja, :, READY] = traj.states[:ja]
    psi_a = basis.conj().T @ traj.states[ja]
    for j in range(ja, n):
        u = post_evolution.propagator(t[j] - t[ja])
        amps[j, :, 1:] = (u @ basis) * psi_a
    amps /= np.sqrt(n)
    amps.setflags(write=False)
    return MemoryHistory(grid, d, d + 1, float(t_a), ja, amps)


@dataclass(frozen=True)
class MemoryOutcomes:
    """Conditional memory statistics at one tick: per-outcome and ready probabilities."""

    outcomes: np.ndarray
    ready: float


def memory_outcome_distribution(mh, j):
    """Born-rule probabilities ``p(a | t_j)`` of the memory records."""
    if not 0 <= j < mh.grid.n_ticks:
        raise IndexError(f"tick index {j} out of range")
    block = mh.amplitudes[j] * np.sqrt(mh.grid.n_ticks)
    probs = np.sum(np.abs(block) ** 2, axis=0)
    return MemoryOutcomes(probs[1:].copy(), float(probs[READY]))


def condition_on_memory(mh, j, record):
    """Normalized system state at tick ``j`` given memory index ``record``."""
    vec = mh.amplitudes[j, :, record]
    nrm = np.linalg.norm(vec)
    if nrm < 1e-15:
        raise NeverOccurs(f"memory record {record} has zero probability at tick {j}")
    return FiniteVec(vec / nrm)


def _complete_basis(psi0):
    d = psi0.shape[0]
    rng = np.random.default_rng(0)
    seed = np.column_stack([psi0, rng.standard_normal((d, d - 1)) + 1j * rng.standard_normal((d, d - 1))])
    q, _ = np.linalg.qr(seed)
    # fix the phase so that the first column is exactly psi0
    q[:, 0] *= np.vdot(q[:, 0], psi0) / abs(np.vdot(q[:, 0], psi0))
    return q


def build_preparation_history(psi0, pre_state, grid, h):
    """History of preparing ``psi0`` at ``t = 0`` by measuring and post-selecting.

    Ticks before 0 hold ``pre_state`` with memory ready. From ``t = 0`` the
    kept branch (memory index 1) carries ``<psi0|pre_state> U(t) psi0``; the
    discarded outcomes (memory ``1 + j``, ``j > 0``) hold their frozen basis
    states, which plays the role of the discard map.
    """
    if not isinstance(psi0, FiniteVec) or not isinstance(pre_state, FiniteVec):
        raise DimensionMismatch("preparation histories need finite-dimensional states")
    for s in (psi0, pre_state):
        if abs(s.norm() - 1.0) > 1e-9:
            raise InvalidArgument("psi0 and pre_state must be normalized")
    d, n = psi0.dim, grid.n_ticks
    if pre_state.dim != d or h.dim != d:
        raise DimensionMismatch("states and Hamiltonian dimensions differ")
    basis = _complete_basis(psi0.amplitudes)
    c = basis.conj().T @ pre_state.amplitudes
    t = np.asarray(grid.tick_times)
    amps = np.zeros((n, d, d + 1), dtype=np.complex128)
    for j in range(n):
        if t[j] < 0:
            amps[j, :, READY] = pre_state.amplitudes
        else:
            amps[j, :, 1] = c[0] * evolve(psi0, h, t[j]).amplitudes
            amps[j, :, 2:] = basis[:, 1:] * c[1:]
    amps /= np.sqrt(n)
    amps.setflags(write=False)
    j0 = int(np.searchsorted(t, 0.0))
    return MemoryHistory(grid, d, d + 1, 0.0, min(j0, n - 1), amps)


# --- decohered histories ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class BranchEnsemble:
    """Branches ``mu_k |phi_k(t)>`` tagged by orthonormal environment states."""

    weights: np.ndarray
    trajectories: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.complex128)
        trajs = tuple(self.trajectories)
        if w.shape != (len(trajs),) or not trajs:
            raise DimensionMismatch("need one weight per branch trajectory")
        if abs(np.sum(np.abs(w) ** 2) - 1.0) > 1e-12:
            raise InvalidArgument("branch weights must satisfy sum |mu_k|^2 = 1")
        g, dim = trajs[0].grid, trajs[0].dim
        if any(tr.grid != g or tr.dim != dim for tr in trajs):
            raise DimensionMismatch("branch trajectories must share grid and dimension")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "trajectories", trajs)

    @property
    def grid(self):
        return self.trajectories[0].grid

    @property
    def probabilities(self):
        return np.abs(self.weights) ** 2


def reduced_joint_probability(ens, p):
    """Joint masses of ``Tr[rho_s(t_j) P] / N`` with ``rho_s`` the branch mixture."""
    probs = ens.probabilities
    q = sum(w * event_probabilities(tr, p) for w, tr in zip(probs, ens.trajectories))
    return q / ens.grid.n_ticks


def reduced_clock_system_distribution(ens, p, grid=None, epsilon_never=EPSILON_NEVER):
    grid = ens.grid if grid is None else grid
    if grid != ens.grid:
        raise DimensionMismatch("ensemble was built on a different clock grid")
    return distribution_from_joint(grid, reduced_joint_probability(ens, p), epsilon_never)


def two_clock_reduction_check(source):
    """Max deviation of ``Tr_{c2,e}|Phi><Phi|`` from ``(1/N) sum_j |t_j><t_j| (x) rho_s(t_j)``.

    ``source`` is a :class:`Trajectory` (single branch) or a
    :class:`BranchEnsemble`. The two-clock state is built explicitly with
    synchronized ticks and one orthonormal environment label per branch.
    """
    ens = source if isinstance(source, BranchEnsemble) else BranchEnsemble(np.ones(1), (source,))
    n, d = ens.grid.n_ticks, ens.trajectories[0].dim
    if n * d > TWO_CLOCK_MAX:
        raise SizeGuardError(f"N*d = {n * d} exceeds the two-clock limit {TWO_CLOCK_MAX}")
    k = len(ens.trajectories)
    branches = np.stack([np.asarray(tr.states) for tr in ens.trajectories], axis=-1)  # (N, d, K)
    phi = np.zeros((n, n, d, k), dtype=np.complex128)
    idx = np.arange(n)
    phi[idx, idx] = branches * ens.weights / np.sqrt(n)
    rho = np.einsum("alke,blme->akbm", phi, phi.conj()).reshape(n * d, n * d)
    target = np.zeros((n, d, n, d), dtype=np.complex128)
    rho_s = np.einsum("jke,jme,e->jkm", branches, branches.conj(), ens.probabilities) / n
    target[idx, :, idx, :] = rho_s
    return float(np.max(np.abs(rho - target.reshape(n * d, n * d))))
