"""Scenario execution: state -> trajectory -> distribution -> comparisons."""

from dataclasses import dataclass, field

import numpy as np

from .. import __version__, kernels
from ..clockgrid import ClockGrid, constraint_residual
from ..dynamics import (
    FiniteMatrix,
    FiniteVec,
    FreeParticle,
    PositionGrid,
    PositionWave,
    PotentialGrid,
    boundary_mass,
    harmonic_potential,
    propagate_trajectory,
)
from ..errors import NeverOccurs, NoFlux
from ..eventtime import (
    FiniteProjector,
    SpatialInterval,
    distribution_from_joint,
    joint_probability,
    moments_from_joint,
)
from ..history import (
    BranchEnsemble,
    build_measurement_history,
    build_tensor_history,
    memory_outcome_distribution,
    reduced_joint_probability,
)
from ..oracles import (
    BRUTE_FORCE_MAX,
    brute_force_conditional,
    current_at_detector,
    flux_arrival_distribution,
    flux_from_current,
)

ENGINE_VERSION = f"pawtime {__version__}"

POVM_TOL = 1e-10
ORACLE_TOL = 1e-12
MEMORY_TOL = 1e-10


@dataclass(eq=False)
class ResultBundle:
    scenario: str
    config_hash: str
    status: str
    message: str = ""
    distribution: object = None
    moments: object = None
    flux: object = None
    comparison: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    measurement: dict | None = None
    verification: dict | None = None
    engine_version: str = ENGINE_VERSION

    @property
    def ok(self):
        return self.status == "ok"


def _packet_state(space, packets, hbar):
    x = np.asarray(space.x)
    psi = np.zeros(space.n_points, dtype=np.complex128)
    for p in packets:
        g = np.exp(-((x - p.x0) ** 2) / (4 * p.sigma**2) + 1j * p.p0 * x / hbar)
        psi += p.weight * g / np.sqrt(space.dx * np.sum(np.abs(g) ** 2))
    nrm = np.sqrt(space.dx * np.sum(np.abs(psi) ** 2))
    return PositionWave(space, psi / nrm)


def build_system(cfg):
    """Return ``(space, hamiltonian, anchors, weights)`` for a scenario.

    ``anchors`` has one entry per branch (a single one without branches).
    """
    sysc, opts = cfg.system, cfg.options
    if sysc.is_finite:
        h = FiniteMatrix(sysc.hamiltonian, hbar=opts.hbar)
        if opts.branches:
            return None, h, [FiniteVec(b.initial) for b in opts.branches], [b.weight for b in opts.branches]
        return None, h, [FiniteVec(sysc.initial)], [1.0]
    g = sysc.grid
    space = PositionGrid(g.x_min, g.x_max, g.n_points)
    if sysc.potential == "harmonic":
        h = PotentialGrid(sysc.mass, harmonic_potential(space, sysc.mass, sysc.omega, sysc.center),
                          hbar=opts.hbar)
    else:
        h = FreeParticle(sysc.mass, hbar=opts.hbar)
    if opts.branches:
        anchors = [_packet_state(space, b.packets, opts.hbar) for b in opts.branches]
        return space, h, anchors, [b.weight for b in opts.branches]
    return space, h, [_packet_state(space, sysc.packets, opts.hbar)], [1.0]


def build_projector(cfg):
    ev = cfg.event
    if ev.kind == "interval":
        return SpatialInterval(ev.d_lo, ev.d_hi)
    return FiniteProjector(ev.projector)


def _peak_time(grid, probs):
    return float(np.asarray(grid.tick_times)[int(np.argmax(probs))])


def run_scenario(cfg, verify=False):
    """Execute one scenario and collect distribution, moments and diagnostics.

    A never-occurring event is reported as ``status == "never_occurs"``.
    With ``verify`` the brute-force, completeness, memory and flux checks
    are evaluated and stored under ``verification``.
    """
    grid = ClockGrid(cfg.clock.window_T, cfg.clock.n_ticks)
    space, h, anchors, weights = build_system(cfg)
    proj = build_projector(cfg)
    opts = cfg.options
    trajs = [propagate_trajectory(a, h, grid, dt_max=opts.dt_max) for a in anchors]
    bundle = ResultBundle(cfg.name, cfg.config_hash, "ok")
    diag = bundle.diagnostics
    diag["backend"] = kernels.BACKEND
    diag["norm_drift"] = max(tr.norm_drift for tr in trajs)

    if opts.branches:
        ens = BranchEnsemble(np.asarray(weights), tuple(trajs))
        q = reduced_joint_probability(ens, proj)
        diag["n_branches"] = len(trajs)
    else:
        ens = None
        q = joint_probability(trajs[0], proj)
        res = constraint_residual(trajs[0], h, grid)
        diag["constraint_residual"] = res.value
        diag["residual_periodic"] = res.periodic
    if space is not None:
        diag["boundary_mass"] = max(
            max(boundary_mass(tr.state(j)) for j in (0, grid.n_ticks // 2, grid.n_ticks - 1))
            for tr in trajs
        )
    joint_total = float(np.sum(q))
    # <Psi|Pi_na|Psi> = <Psi|Psi> - sum_j q_j; the history norm is (1/N) sum_j ||psi_j||^2
    norm_sq = sum(w * float(np.mean(tr.norms() ** 2)) for w, tr in zip(np.abs(weights) ** 2, trajs))
    not_arrived = norm_sq - joint_total
    diag["joint_total"] = joint_total
    diag["not_arrived_probability"] = not_arrived
    diag["povm_completeness_error"] = abs(joint_total + not_arrived - 1.0)

    try:
        bundle.distribution = distribution_from_joint(grid, q, opts.epsilon_never)
        bundle.moments = moments_from_joint(grid, q, opts.epsilon_never)
    except NeverOccurs as exc:
        bundle.status = "never_occurs"
        bundle.message = str(exc)

    if opts.compare_flux:
        _compare_flux(bundle, cfg, trajs, ens, h, proj, grid)
    if opts.measurement is not None:
        bundle.measurement = _measurement(cfg, trajs[0], h)
    if verify:
        bundle.verification = _verify(bundle, cfg, trajs, ens, proj)
    return bundle


def _compare_flux(bundle, cfg, trajs, ens, h, proj, grid):
    opts = cfg.options
    x_d = opts.flux_x
    if x_d is None:
        x_d = 0.5 * (proj.d_lo + proj.d_hi)
    if ens is not None:
        # decohered flux: branch currents add with weights |mu_k|^2
        cur = sum(w * current_at_detector(tr, x_d, h.mass, h.hbar)
                  for w, tr in zip(ens.probabilities, ens.trajectories))
        try:
            flux = flux_from_current(grid, cur, x_d, opts.epsilon_never)
        except NoFlux as exc:
            bundle.comparison = {"status": "no_flux", "x_D": float(x_d), "message": str(exc)}
            return
    else:
        try:
            flux = flux_arrival_distribution(trajs[0], x_d, h.mass, h.hbar, epsilon=opts.epsilon_never)
        except NoFlux as exc:
            bundle.comparison = {"status": "no_flux", "x_D": float(x_d), "message": str(exc)}
            return
    bundle.flux = flux
    bundle.diagnostics["clipped_flux_mass"] = flux.clipped_fraction
    comp = {"status": "ok", "x_D": float(x_d), "flux_peak_time": _peak_time(grid, flux.probs)}
    if bundle.distribution is not None:
        pw_peak = _peak_time(grid, bundle.distribution.probs)
        comp["l1"] = float(np.abs(bundle.distribution.probs - flux.probs).sum())
        comp["pw_peak_time"] = pw_peak
        comp["peak_offset"] = pw_peak - comp["flux_peak_time"]
    bundle.comparison = comp


def _measurement(cfg, traj, h):
    m = cfg.options.measurement
    mh = build_measurement_history(traj, m.t_a, m.basis, h)
    expected = np.abs(m.basis.conj().T @ traj.states[mh.tick_a]) ** 2
    after = [memory_outcome_distribution(mh, j).outcomes for j in range(mh.tick_a, traj.n_ticks)]
    before = [memory_outcome_distribution(mh, j) for j in range(mh.tick_a)]
    after = np.array(after)
    return {
        "t_a": m.t_a,
        "t_a_snapped": mh.t_a_snapped,
        "tick_a": mh.tick_a,
        "outcome_probabilities": after[0].tolist(),
        "expected_probabilities": expected.tolist(),
        "max_born_error": float(np.max(np.abs(after - expected))),
        "max_record_drift": float(np.max(np.abs(after - after[0]))),
        "max_outcome_before": float(max((b.outcomes.max() for b in before), default=0.0)),
        "history_norm": mh.norm(),
    }


def _verify(bundle, cfg, trajs, ens, proj):
    checks = {}

    def record(name, value, tol, ok):
        checks[name] = {"value": value, "tolerance": tol, "passed": bool(ok)}

    err = bundle.diagnostics["povm_completeness_error"]
    record("povm_completeness", err, POVM_TOL, err <= POVM_TOL)
    if ens is None and cfg.system.is_finite and trajs[0].n_ticks * trajs[0].dim <= BRUTE_FORCE_MAX:
        th = build_tensor_history(trajs[0])
        if bundle.distribution is not None:
            bf = brute_force_conditional(th, proj, cfg.options.epsilon_never)
            dev = float(np.max(np.abs(bf.probs - bundle.distribution.probs)))
            record("brute_force_conditional", dev, ORACLE_TOL, dev <= ORACLE_TOL)
        else:
            try:
                brute_force_conditional(th, proj, cfg.options.epsilon_never)
                record("brute_force_never_occurs", 0.0, 0.0, False)
            except NeverOccurs:
                record("brute_force_never_occurs", 0.0, 0.0, True)
    if bundle.measurement is not None:
        m = bundle.measurement
        record("memory_born_rule", m["max_born_error"], MEMORY_TOL, m["max_born_error"] <= MEMORY_TOL)
        record("memory_record_stability", m["max_record_drift"], 1e-12, m["max_record_drift"] <= 1e-12)
        record("memory_before_measurement", m["max_outcome_before"], MEMORY_TOL,
               m["max_outcome_before"] <= MEMORY_TOL)
    c = cfg.options.checks
    comp = bundle.comparison
    if c.flux_l1_max is not None:
        v = comp.get("l1")
        record("flux_l1_max", v, c.flux_l1_max, v is not None and v < c.flux_l1_max)
    if c.flux_l1_min is not None:
        v = comp.get("l1")
        # no positive flux at all counts as maximal disagreement
        ok = comp.get("status") == "no_flux" or (v is not None and v > c.flux_l1_min)
        record("flux_l1_min", v, c.flux_l1_min, ok)
    if c.peak_time is not None:
        tol = c.peak_tolerance if c.peak_tolerance is not None else 2 * trajs[0].grid.dt
        if bundle.distribution is not None:
            off = abs(_peak_time(trajs[0].grid, bundle.distribution.probs) - c.peak_time)
            record("peak_time", off, tol, off <= tol)
        else:
            record("peak_time", None, tol, False)
    return checks
