import warnings

import numpy as np
import pytest

from pawtime.clockgrid import ClockGrid
from pawtime.dynamics import (
    FiniteMatrix,
    FiniteVec,
    FreeParticle,
    GaussianParams,
    GridMarginWarning,
    PositionGrid,
    PositionWave,
    PotentialGrid,
    evolve,
    fidelity,
    gaussian_packet,
    harmonic_potential,
    inner,
    mean_momentum,
    mean_position,
    position_spread,
    propagate_trajectory,
)
from pawtime.errors import DimensionMismatch, InvalidArgument
from pawtime.oracles import free_gaussian_closed_form, haar_state, random_hermitian

from conftest import RABI_H


def _ho(m=256, L=16.0):
    space = PositionGrid(-L, L, m)
    return space, PotentialGrid(1.0, harmonic_potential(space, 1.0, 1.0))


def test_position_grid_validation():
    with pytest.raises(InvalidArgument):
        PositionGrid(-1.0, 1.0, 100)
    with pytest.raises(InvalidArgument):
        PositionGrid(1.0, -1.0, 64)
    g = PositionGrid(-1.0, 1.0, 8)
    assert g.dx == 0.25
    assert g.x[0] == -1.0 and g.x[-1] == 0.75


def test_gaussian_packet_centered():
    psi = gaussian_packet(GaussianParams(0.0, 0.0, 1.0), -20.0, 20.0, 512)
    assert psi.norm() == pytest.approx(1.0, abs=1e-9)
    assert abs(mean_position(psi)) < 1e-9
    assert position_spread(psi) == pytest.approx(1.0, abs=1e-9)


def test_gaussian_packet_momentum():
    psi = gaussian_packet(GaussianParams(0.0, 2.0, 1.0), -20.0, 20.0, 512)
    assert mean_momentum(psi) == pytest.approx(2.0, abs=1e-6)


def test_gaussian_params_validation():
    with pytest.raises(InvalidArgument):
        GaussianParams(0.0, 0.0, 0.0)
    with pytest.raises(InvalidArgument):
        GaussianParams(0.0, 0.0, 1.0, mass=-1.0)


def test_gaussian_packet_margin_warning():
    with pytest.warns(GridMarginWarning):
        gaussian_packet(GaussianParams(17.0, 0.0, 1.0), -20.0, 20.0, 512)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        gaussian_packet(GaussianParams(0.0, 0.0, 1.0), -20.0, 20.0, 512)


def test_evolve_zero_is_identity(rabi, up):
    assert evolve(up, rabi, 0.0) is up


def test_evolve_rabi_half_period(rabi, up):
    out = evolve(up, rabi, np.pi)
    np.testing.assert_allclose(out.amplitudes, [0.0, -1j], atol=1e-12)


def test_evolve_free_spreading_law():
    psi = gaussian_packet(GaussianParams(0.0, 0.0, 1.0), -40.0, 40.0, 1024)
    out = evolve(psi, FreeParticle(1.0), 1.0)
    # |sigma_t|^2 = sigma^2 (1 + (hbar t / (2 m sigma^2))^2)
    assert position_spread(out) ** 2 == pytest.approx(1.25, rel=1e-9)


def test_evolve_dimension_checks(rabi):
    psi = gaussian_packet(GaussianParams(0.0, 0.0, 1.0), -20.0, 20.0, 256)
    with pytest.raises(DimensionMismatch):
        evolve(psi, rabi, 1.0)
    with pytest.raises(DimensionMismatch):
        evolve(FiniteVec([1, 0, 0]), rabi, 1.0)
    with pytest.raises(DimensionMismatch):
        evolve(FiniteVec([1, 0]), FreeParticle(1.0), 1.0)


def test_free_evolution_matches_closed_form():
    params = GaussianParams(-10.0, 2.0, 1.0)
    psi = gaussian_packet(params, -80.0, 80.0, 1024)
    x = np.asarray(psi.grid.x)
    np.testing.assert_allclose(psi.amplitudes, free_gaussian_closed_form(params, 0.0, x), atol=1e-12)
    out = evolve(psi, FreeParticle(1.0), 10.0)
    assert np.max(np.abs(out.amplitudes - free_gaussian_closed_form(params, 10.0, x))) < 1e-8


@pytest.mark.parametrize("kind", ["finite", "free", "potential"])
def test_unitarity_and_reversibility(kind, rng):
    if kind == "finite":
        h = FiniteMatrix(random_hermitian(rng, 4, 3.0))
        psi = FiniteVec(haar_state(rng, 4))
    elif kind == "free":
        h = FreeParticle(1.5)
        psi = gaussian_packet(GaussianParams(1.0, -1.0, 1.5, 1.5), -30.0, 30.0, 256)
    else:
        space, h = _ho()
        psi = gaussian_packet(GaussianParams(2.0, 0.5, 0.8), -16.0, 16.0, 256)
    fwd = evolve(psi, h, 0.37, dt_max=0.01)
    assert fwd.norm() == pytest.approx(psi.norm(), abs=1e-10)
    back = evolve(fwd, h, -0.37, dt_max=0.01)
    assert np.max(np.abs(back.amplitudes - psi.amplitudes)) < 1e-9


@pytest.mark.parametrize("kind", ["finite", "free"])
def test_composition_exact(kind, rng):
    if kind == "finite":
        h = FiniteMatrix(random_hermitian(rng, 3, 2.0))
        psi = FiniteVec(haar_state(rng, 3))
    else:
        h = FreeParticle(1.0)
        psi = gaussian_packet(GaussianParams(0.0, 1.0, 1.0), -30.0, 30.0, 256)
    two = evolve(evolve(psi, h, 0.4), h, 0.9)
    one = evolve(psi, h, 1.3)
    assert np.max(np.abs(two.amplitudes - one.amplitudes)) < 1e-8


def test_composition_split_step():
    _, h = _ho()
    psi = gaussian_packet(GaussianParams(3.0, 0.0, 0.7071067811865476), -16.0, 16.0, 256)
    # substeps of the same length make the two paths identical step sequences
    two = evolve(evolve(psi, h, 0.4, dt_max=0.001), h, 0.6, dt_max=0.001)
    one = evolve(psi, h, 1.0, dt_max=0.001)
    assert np.max(np.abs(two.amplitudes - one.amplitudes)) < 1e-8


def test_split_step_second_order():
    _, h = _ho()
    psi = gaussian_packet(GaussianParams(3.0, 0.5, 1.0), -16.0, 16.0, 256)
    ref = evolve(psi, h, 2.0, dt_max=1e-4)

    def err(dt_max):
        out = evolve(psi, h, 2.0, dt_max=dt_max)
        return np.sqrt(psi.grid.dx * np.sum(np.abs(out.amplitudes - ref.amplitudes) ** 2))

    ratio = err(0.02) / err(0.01)
    assert 3.5 <= ratio <= 4.5


def test_coherent_state_follows_classical_orbit():
    # coherent state in the trap: <x>(t) = x0 cos(t)
    _, h = _ho()
    psi = gaussian_packet(GaussianParams(4.0, 0.0, 0.7071067811865476), -16.0, 16.0, 256)
    g = ClockGrid(2 * np.pi, 64)
    traj = propagate_trajectory(psi, h, g)
    xs = np.array([mean_position(traj.state(j)) for j in range(g.n_ticks)])
    np.testing.assert_allclose(xs, 4.0 * np.cos(g.tick_times), atol=1e-4)


def test_trajectory_zero_hamiltonian(up):
    g = ClockGrid(3.0, 10)
    traj = propagate_trajectory(up, FiniteMatrix(np.zeros((2, 2))), g)
    np.testing.assert_allclose(traj.states, np.tile(up.amplitudes, (10, 1)), atol=0)


def test_trajectory_eigenstate_phases():
    h = FiniteMatrix(np.diag([0.3, 1.7]))
    g = ClockGrid(5.0, 20)
    traj = propagate_trajectory(FiniteVec([0.0, 1.0]), h, g)
    expected = np.exp(-1j * 1.7 * np.asarray(g.tick_times))
    np.testing.assert_allclose(traj.states[:, 1], expected, atol=1e-12)
    for j in range(g.n_ticks):
        assert fidelity(traj.state(j), FiniteVec([0.0, 1.0])) == pytest.approx(1.0, abs=1e-9)


def test_trajectory_rabi_population(rabi, up):
    g = ClockGrid(2 * np.pi, 64)
    traj = propagate_trajectory(up, rabi, g)
    np.testing.assert_allclose(np.abs(traj.states[:, 0]) ** 2, np.cos(g.tick_times / 2) ** 2, atol=1e-9)


def test_trajectory_potential_norm_and_anchor():
    _, h = _ho()
    psi = gaussian_packet(GaussianParams(3.0, 0.0, 0.7071067811865476), -16.0, 16.0, 256)
    g = ClockGrid(4.0, 40)
    traj = propagate_trajectory(psi, h, g)
    assert traj.norm_drift < 1e-8
    np.testing.assert_allclose(traj.norms(), 1.0, atol=1e-9)
    # sequential stepping agrees with a direct evolution to the last tick
    t_last = float(g.tick_times[-1])
    direct = evolve(psi, h, t_last, dt_max=g.dt / 8)
    assert abs(inner(direct, traj.state(g.n_ticks - 1))) == pytest.approx(1.0, abs=1e-6)


def test_trajectory_rejects_unnormalized_anchor(rabi):
    with pytest.raises(InvalidArgument):
        propagate_trajectory(FiniteVec([1.0, 1.0]), rabi, ClockGrid(1.0, 4))


def test_finite_matrix_hermitian_check():
    with pytest.raises(InvalidArgument):
        FiniteMatrix(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_position_wave_shape_check():
    with pytest.raises(DimensionMismatch):
        PositionWave(PositionGrid(-1.0, 1.0, 8), np.ones(4))


def test_finite_matrix_propagator_matches_rabi_formula():
    u = FiniteMatrix(RABI_H).propagator(0.8)
    expected = np.array([[np.cos(0.4), -1j * np.sin(0.4)], [-1j * np.sin(0.4), np.cos(0.4)]])
    np.testing.assert_allclose(u, expected, atol=1e-14)


def test_trajectory_drift_guard_names_tick():
    from pawtime.errors import PropagationError

    _, h = _ho()
    psi = gaussian_packet(GaussianParams(3.0, 0.0, 0.7071067811865476), -16.0, 16.0, 256)
    with pytest.raises(PropagationError, match="tick") as info:
        propagate_trajectory(psi, h, ClockGrid(4.0, 40), drift_tol=0.0)
    assert 0 <= info.value.tick < 40
