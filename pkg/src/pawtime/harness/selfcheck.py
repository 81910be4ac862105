"""Quick invariant checks run by ``pawtime selfcheck``.

Each check returns ``(name, value, tolerance)``; a check passes when
``value <= tolerance``.
"""

import numpy as np

from .. import kernels
from ..clockgrid import ClockGrid, clock_fourier, inverse_clock_fourier
from ..dynamics import FiniteMatrix, FiniteVec, evolve, propagate_trajectory
from ..eventtime import arrival_distribution, joint_probability, not_arrived_probability
from ..history import BranchEnsemble, build_tensor_history, two_clock_reduction_check
from ..oracles import brute_force_conditional, haar_state, random_hermitian, random_instance


def _oracle_equivalence(rng):
    worst = 0.0
    for _ in range(20):
        traj, proj, _ = random_instance(rng)
        if joint_probability(traj, proj).sum() < 1e-9:
            continue
        a = arrival_distribution(traj, proj).probs
        b = brute_force_conditional(build_tensor_history(traj), proj).probs
        worst = max(worst, float(np.max(np.abs(a - b))))
    return "oracle_equivalence", worst, 1e-12


def _povm_completeness(rng):
    worst = 0.0
    for _ in range(20):
        traj, proj, _ = random_instance(rng)
        total = joint_probability(traj, proj).sum() + not_arrived_probability(traj, proj)
        worst = max(worst, abs(total - 1.0))
    return "povm_completeness", worst, 1e-10


def _unitarity(rng):
    worst = 0.0
    for d in (2, 3, 4):
        h = FiniteMatrix(random_hermitian(rng, d, 3.0))
        psi = FiniteVec(haar_state(rng, d))
        there = evolve(psi, h, 0.7)
        back = evolve(there, h, -0.7)
        worst = max(worst, abs(there.norm() - 1.0), float(np.max(np.abs(back.amplitudes - psi.amplitudes))))
    return "unitarity_reversibility", worst, 1e-9


def _fourier_roundtrip(rng):
    grid = ClockGrid(3.0, 16)
    states = rng.standard_normal((16, 3)) + 1j * rng.standard_normal((16, 3))
    err = float(np.max(np.abs(inverse_clock_fourier(clock_fourier(states, grid), grid) - states)))
    return "clock_fourier_roundtrip", err, 1e-12


def _two_clock(rng):
    grid = ClockGrid(2.0, 8)
    h = FiniteMatrix(random_hermitian(rng, 3, 2.0))
    trajs = tuple(propagate_trajectory(FiniteVec(haar_state(rng, 3)), h, grid) for _ in range(2))
    ens = BranchEnsemble(np.array([0.6, 0.8]), trajs)
    return "two_clock_reduction", two_clock_reduction_check(ens), 1e-12


def _backends(rng):
    backends = kernels.available_backends()
    states = np.ascontiguousarray(rng.standard_normal((32, 64)) + 1j * rng.standard_normal((32, 64)))
    w = rng.uniform(size=64)
    ref = backends["python"].weighted_abs2(states, w)
    worst = max(float(np.max(np.abs(b.weighted_abs2(states, w) - ref))) for b in backends.values())
    return "kernel_backends_agree", worst, 1e-12


CHECKS = (_oracle_equivalence, _povm_completeness, _unitarity, _fourier_roundtrip, _two_clock, _backends)


def run_selfcheck(seed=0):
    rng = np.random.default_rng(seed)
    return [check(rng) for check in CHECKS]
