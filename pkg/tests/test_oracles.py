import numpy as np
import pytest

from pawtime.clockgrid import ClockGrid
from pawtime.dynamics import (
    FiniteMatrix,
    FiniteVec,
    FreeParticle,
    GaussianParams,
    evolve,
    gaussian_packet,
    propagate_trajectory,
    trajectory_from_states,
)
from pawtime.errors import DimensionMismatch, InvalidArgument, NeverOccurs, NoFlux, SizeGuardError
from pawtime.eventtime import FiniteProjector, SpatialInterval, arrival_distribution
from pawtime.history import build_tensor_history
from pawtime.oracles import (
    brute_force_conditional,
    flux_arrival_distribution,
    free_gaussian_closed_form,
    probability_current,
    random_hermitian,
    random_instance,
    random_projector,
)

from conftest import RABI_H


def _right_mass(state, x_d):
    """Exact mass of the grid's Fourier interpolant on ``[x_d, x_max)``."""
    a, g = state.amplitudes, state.grid
    m, length = a.size, g.x_max - g.x_min
    f = np.fft.fft(a)
    padded = np.zeros(2 * m, dtype=complex)
    padded[: m // 2], padded[-m // 2:] = f[: m // 2], f[-m // 2:]
    # |psi|^2 is band-limited to twice the grid band, so the doubled grid resolves it exactly
    rho = np.abs(2 * np.fft.ifft(padded)) ** 2
    r = np.fft.fft(rho) / (2 * m)
    kap = 2 * np.pi * np.fft.fftfreq(2 * m, d=length / (2 * m))
    u0, u1 = x_d - g.x_min, length
    safe = np.where(kap == 0, 1.0, kap)
    integ = np.where(kap == 0, u1 - u0, (np.exp(1j * kap * u1) - np.exp(1j * kap * u0)) / (1j * safe))
    return float(np.real(np.sum(r * integ)))


# --- closed-form Gaussian ---------------------------------------------------


def test_closed_form_normalized_and_centered():
    params = GaussianParams(-3.0, 1.5, 0.8, mass=2.0)
    x = np.linspace(-60, 60, 8192, endpoint=False)
    dx = x[1] - x[0]
    for t in (0.0, 4.0):
        psi = free_gaussian_closed_form(params, t, x)
        assert dx * np.sum(np.abs(psi) ** 2) == pytest.approx(1.0, abs=1e-12)
        center = dx * np.sum(x * np.abs(psi) ** 2)
        assert center == pytest.approx(-3.0 + 1.5 * t / 2.0, abs=1e-12)


def test_closed_form_matches_packet_at_zero():
    params = GaussianParams(1.0, -2.0, 1.3)
    psi = gaussian_packet(params, -30.0, 30.0, 512)
    np.testing.assert_allclose(psi.amplitudes, free_gaussian_closed_form(params, 0.0, psi.grid.x), atol=1e-12)


def test_closed_form_hbar_scaling():
    # the free packet depends on hbar only through hbar t and p0 / hbar
    x = np.linspace(-20, 20, 101)
    a = free_gaussian_closed_form(GaussianParams(0.0, 2.0, 1.0), 2.0, x, hbar=2.0)
    b = free_gaussian_closed_form(GaussianParams(0.0, 1.0, 1.0), 4.0, x, hbar=1.0)
    np.testing.assert_allclose(np.abs(a), np.abs(b), atol=1e-14)


# --- probability current ----------------------------------------------------


def test_current_real_state_is_zero():
    psi = gaussian_packet(GaussianParams(0.0, 0.0, 1.0), -20.0, 20.0, 256)
    for x in (-1.0, 0.0, 0.37):
        assert abs(probability_current(psi, x, 1.0)) < 1e-12


def test_current_sign():
    right = gaussian_packet(GaussianParams(0.0, 2.0, 1.0), -20.0, 20.0, 256)
    left = gaussian_packet(GaussianParams(0.0, -2.0, 1.0), -20.0, 20.0, 256)
    assert probability_current(right, 0.0, 1.0) > 0
    assert probability_current(left, 0.0, 1.0) < 0
    # at the centre J = (p0 / m) |psi|^2 with |psi(0)|^2 = 1/sqrt(2 pi)
    assert probability_current(right, 0.0, 1.0) == pytest.approx(2.0 / np.sqrt(2 * np.pi), rel=1e-10)


@pytest.mark.parametrize("x_d", [0.3125, 0.3, -1.7])
def test_current_continuity(x_d):
    psi = gaussian_packet(GaussianParams(-3.0, 2.0, 1.0), -40.0, 40.0, 512)
    h, tau = FreeParticle(1.0), 1e-4
    rate = (_right_mass(evolve(psi, h, tau), x_d) - _right_mass(evolve(psi, h, -tau), x_d)) / (2 * tau)
    assert probability_current(psi, x_d, 1.0) == pytest.approx(rate, abs=1e-6)


def test_current_errors():
    psi = gaussian_packet(GaussianParams(0.0, 0.0, 1.0), -20.0, 20.0, 256)
    with pytest.raises(InvalidArgument):
        probability_current(psi, 30.0, 1.0)
    with pytest.raises(DimensionMismatch):
        probability_current(FiniteVec([1.0, 0.0]), 0.0, 1.0)


# --- flux distribution ------------------------------------------------------


def test_flux_no_crossing():
    # a packet at rest far from x_D carries no current there
    psi = gaussian_packet(GaussianParams(-30.0, 0.0, 1.0), -64.0, 64.0, 512)
    traj = propagate_trajectory(psi, FreeParticle(1.0), ClockGrid(2.0, 32))
    with pytest.raises(NoFlux):
        flux_arrival_distribution(traj, 30.0, 1.0)


def test_flux_needs_position_trajectory():
    traj = propagate_trajectory(FiniteVec([1.0, 0.0]), FiniteMatrix(RABI_H), ClockGrid(1.0, 4))
    with pytest.raises(DimensionMismatch):
        flux_arrival_distribution(traj, 0.0, 1.0)


def test_flux_peak_near_transit_and_small_backflow():
    # sigma p0 / hbar = 12, far-prepared: the classical transit time (x_D - x0) / v = 5
    psi = gaussian_packet(GaussianParams(-20.0, 4.0, 3.0), -160.0, 160.0, 2048)
    g = ClockGrid(20.0, 512)
    flux = flux_arrival_distribution(propagate_trajectory(psi, FreeParticle(1.0), g), 0.0, 1.0)
    assert flux.probs.sum() == pytest.approx(1.0, abs=1e-9)
    peak = g.tick_times[np.argmax(flux.probs)]
    assert abs(peak - 5.0) <= 2 * g.dt
    assert flux.clipped_fraction < 1e-3


def _pw_vs_flux(x0, p0, sigma, T, n, L, m):
    psi = gaussian_packet(GaussianParams(x0, p0, sigma), -L, L, m)
    g = ClockGrid(T, n)
    traj = propagate_trajectory(psi, FreeParticle(1.0), g)
    dx = psi.grid.dx
    pw = arrival_distribution(traj, SpatialInterval(-dx, dx)).probs
    flux = flux_arrival_distribution(traj, 0.0, 1.0).probs
    return np.abs(pw - flux).sum(), g.tick_times[np.argmax(pw)], g.dt


def test_flux_agreement_improves_far_from_detector():
    # agreement is asymptotic in sigma p0 / hbar and in the launch distance
    l1_near, _, _ = _pw_vs_flux(-10.0, 2.0, 1.0, 20.0, 512, 80.0, 1024)
    l1_mid, _, _ = _pw_vs_flux(-20.0, 4.0, 2.0, 20.0, 512, 160.0, 2048)
    l1_far, peak, dt = _pw_vs_flux(-40.0, 8.0, 4.0, 20.0, 1024, 320.0, 8192)
    assert l1_far < l1_mid < l1_near
    assert l1_far < 0.02
    assert abs(peak - 5.0) <= 2 * dt


# --- brute-force conditional ------------------------------------------------


def test_brute_force_matches_main_path(rng):
    for _ in range(30):
        traj, proj, _ = random_instance(rng)
        th = build_tensor_history(traj)
        try:
            main = arrival_distribution(traj, proj)
        except NeverOccurs:
            with pytest.raises(NeverOccurs):
                brute_force_conditional(th, proj)
            continue
        assert np.max(np.abs(brute_force_conditional(th, proj).probs - main.probs)) < 1e-12


def test_brute_force_rabi_profile():
    traj = propagate_trajectory(FiniteVec([1.0, 0.0]), FiniteMatrix(RABI_H), ClockGrid(2 * np.pi, 128))
    d = brute_force_conditional(build_tensor_history(traj), FiniteProjector(np.diag([1.0, 0.0])))
    t = np.asarray(traj.grid.tick_times)
    assert np.max(np.abs(d.probs - (2 / 128) * np.cos(t / 2) ** 2)) < 1e-9


def test_brute_force_spatial_stationary():
    psi = gaussian_packet(GaussianParams(0.0, 0.0, 1.0), -16.0, 16.0, 128)
    traj = trajectory_from_states(ClockGrid(1.0, 8), np.tile(psi.amplitudes, (8, 1)), psi.grid)
    d = brute_force_conditional(build_tensor_history(traj), SpatialInterval(-8.0, 8.0))
    np.testing.assert_allclose(d.probs, 1 / 8, atol=1e-12)


def test_brute_force_size_guard():
    traj = propagate_trajectory(FiniteVec(np.eye(4)[0]), FiniteMatrix(np.zeros((4, 4))), ClockGrid(1.0, 2**15))
    with pytest.raises(SizeGuardError):
        brute_force_conditional(build_tensor_history(traj), FiniteProjector(np.eye(4)))


# --- instance generator -----------------------------------------------------


def test_random_hermitian_radius(rng):
    for d in (1, 2, 4):
        h = random_hermitian(rng, d, 2.5)
        np.testing.assert_allclose(h, h.conj().T, atol=0)
        assert np.max(np.abs(np.linalg.eigvalsh(h))) <= 2.5 + 1e-12


def test_random_projector_idempotent(rng):
    p = random_projector(rng, 4, rank=2)
    assert np.trace(p.P).real == pytest.approx(2.0, abs=1e-12)


def test_random_instance_bounds(rng):
    for _ in range(20):
        traj, proj, h = random_instance(rng, d_max=4, n_max=64)
        assert 1 <= traj.dim <= 4 and 2 <= traj.n_ticks <= 64
        assert np.max(np.abs(h.energies)) <= 4 * np.pi / traj.grid.window_T + 1e-12
        np.testing.assert_allclose(traj.norms(), 1.0, atol=1e-12)
