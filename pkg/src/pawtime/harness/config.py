"""Scenario files: YAML with a fixed schema, validated eagerly.

Complex numbers are written either as plain numbers or as strings Python's
``complex()`` accepts (``"0.5-0.5j"``). Unknown keys are rejected.
"""

import copy
import hashlib
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from ..errors import ValidationError


class ScenarioParseError(ValidationError):
    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class PacketSpec:
    x0: float
    p0: float
    sigma: float
    weight: complex = 1.0


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    n_points: int


@dataclass(frozen=True, eq=False)
class SystemSpec:
    kind: str
    mass: float = 1.0
    potential: str = "free"
    omega: float = 1.0
    center: float = 0.0
    grid: GridSpec | None = None
    packets: tuple = ()
    hamiltonian: np.ndarray | None = None
    initial: np.ndarray | None = None

    @property
    def is_finite(self):
        return self.kind == "finite"


@dataclass(frozen=True)
class ClockSpec:
    window_T: float
    n_ticks: int


@dataclass(frozen=True, eq=False)
class EventSpec:
    kind: str
    d_lo: float | None = None
    d_hi: float | None = None
    projector: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class MeasurementSpec:
    t_a: float
    basis: np.ndarray


@dataclass(frozen=True, eq=False)
class BranchSpec:
    weight: complex
    packets: tuple = ()
    initial: np.ndarray | None = None


@dataclass(frozen=True)
class Checks:
    flux_l1_max: float | None = None
    flux_l1_min: float | None = None
    peak_time: float | None = None
    peak_tolerance: float | None = None


@dataclass(frozen=True, eq=False)
class Options:
    hbar: float = 1.0
    epsilon_never: float = 1e-12
    dt_max: float | None = None
    compare_flux: bool = False
    flux_x: float | None = None
    must_occur: bool = False
    measurement: MeasurementSpec | None = None
    branches: tuple = ()
    checks: Checks = field(default_factory=Checks)


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    name: str
    system: SystemSpec
    clock: ClockSpec
    event: EventSpec
    options: Options
    outputs: tuple
    description: str = ""
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def config_hash(self):
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


# --- parsing helpers --------------------------------------------------------

_TOP = {"name", "description", "system", "clock", "event", "options", "outputs"}
_SYSTEM = {"kind", "mass", "potential", "omega", "center", "grid", "packets", "hamiltonian", "initial"}
_GRID = {"x_min", "x_max", "n_points"}
_PACKET = {"x0", "p0", "sigma", "weight"}
_CLOCK = {"window_T", "n_ticks"}
_EVENT = {"kind", "d_lo", "d_hi", "projector"}
_OPTIONS = {"hbar", "epsilon_never", "dt_max", "compare_flux", "flux_x", "must_occur",
            "measurement", "branches", "checks"}
_MEAS = {"t_a", "basis"}
_BRANCH = {"weight", "packets", "initial"}
_CHECKS = {"flux_l1_max", "flux_l1_min", "peak_time", "peak_tolerance"}
OUTPUT_KINDS = {"csv", "json"}


def _fail(msg):
    raise ValidationError(msg)


def _section(d, where, allowed, required=()):
    if not isinstance(d, dict):
        _fail(f"{where} must be a mapping")
    extra = set(d) - allowed
    if extra:
        _fail(f"unknown key(s) in {where}: {', '.join(sorted(extra))}")
    for key in required:
        if key not in d:
            _fail(f"{where}.{key} is required")
    return d


def _real(d, key, where, default=None, required=False):
    if key not in d:
        if required:
            _fail(f"{where}.{key} is required")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(f"{where}.{key} must be a real number")
    if not np.isfinite(v):
        _fail(f"{where}.{key} must be finite")
    return float(v)


def _complex(v, where):
    if isinstance(v, bool):
        _fail(f"{where} must be a number")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, str):
        try:
            return complex(v.replace(" ", ""))
        except ValueError:
            pass
    _fail(f"{where} must be a number or a complex literal such as '0.5-0.5j'")


def _cvector(v, where):
    if not isinstance(v, list) or not v:
        _fail(f"{where} must be a non-empty list")
    return np.array([_complex(x, f"{where}[{i}]") for i, x in enumerate(v)], dtype=np.complex128)


def _cmatrix(v, where):
    if not isinstance(v, list) or not v or not all(isinstance(r, list) for r in v):
        _fail(f"{where} must be a list of rows")
    rows = [_cvector(r, f"{where}[{i}]") for i, r in enumerate(v)]
    if any(r.shape != (len(rows),) for r in rows):
        _fail(f"{where} must be square")
    return np.array(rows)


def _normalized_vector(v, where):
    vec = _cvector(v, where)
    n = np.linalg.norm(vec)
    if n == 0:
        _fail(f"{where} must not be the zero vector")
    return vec / n


def _packets(v, where):
    if not isinstance(v, list) or not v:
        _fail(f"{where} must be a non-empty list of packets")
    out = []
    for i, p in enumerate(v):
        w = f"{where}[{i}]"
        _section(p, w, _PACKET, ("x0", "p0", "sigma"))
        sigma = _real(p, "sigma", w)
        if sigma <= 0:
            _fail(f"{w}.sigma must be positive")
        out.append(PacketSpec(_real(p, "x0", w), _real(p, "p0", w), sigma,
                              _complex(p.get("weight", 1.0), f"{w}.weight")))
    return tuple(out)


def _parse_system(d):
    _section(d, "system", _SYSTEM, ("kind",))
    kind = d["kind"]
    if kind not in ("gaussian", "superposition", "finite"):
        _fail("system.kind must be one of gaussian, superposition, finite")
    if kind == "finite":
        if "hamiltonian" not in d:
            _fail("system.hamiltonian is required for finite systems")
        h = _cmatrix(d["hamiltonian"], "system.hamiltonian")
        if np.max(np.abs(h - h.conj().T)) > 1e-12:
            _fail("system.hamiltonian must be Hermitian")
        init = _normalized_vector(d["initial"], "system.initial") if "initial" in d else None
        if init is not None and init.shape[0] != h.shape[0]:
            _fail("system.initial dimension must match system.hamiltonian")
        return SystemSpec(kind, hamiltonian=h, initial=init)
    mass = _real(d, "mass", "system", 1.0)
    if mass <= 0:
        _fail("system.mass must be positive")
    potential = d.get("potential", "free")
    if potential not in ("free", "harmonic"):
        _fail("system.potential must be 'free' or 'harmonic'")
    omega = _real(d, "omega", "system", 1.0)
    if potential == "harmonic" and omega <= 0:
        _fail("system.omega must be positive")
    if "grid" not in d:
        _fail("system.grid is required for particle systems")
    g = _section(d["grid"], "system.grid", _GRID, tuple(_GRID))
    x_min, x_max = _real(g, "x_min", "system.grid"), _real(g, "x_max", "system.grid")
    m = g["n_points"]
    if x_max <= x_min:
        _fail("system.grid requires x_min < x_max")
    if isinstance(m, bool) or not isinstance(m, int) or m < 2 or m & (m - 1):
        _fail("system.grid.n_points must be a power of two")
    packets = _packets(d["packets"], "system.packets") if "packets" in d else ()
    if kind == "gaussian" and len(packets) > 1:
        _fail("system.kind gaussian takes exactly one packet; use superposition")
    grid = GridSpec(x_min, x_max, m)
    for i, p in enumerate(packets):
        if p.x0 - 5 * p.sigma < x_min or p.x0 + 5 * p.sigma > x_max:
            warnings.warn(f"system.packets[{i}] is within 5 sigma of the grid edge")
    return SystemSpec(kind, mass, potential, omega, _real(d, "center", "system", 0.0), grid, packets)


def _parse_event(d, system):
    _section(d, "event", _EVENT, ("kind",))
    kind = d["kind"]
    if kind == "interval":
        if system.is_finite:
            _fail("event.kind interval needs a particle system")
        lo, hi = _real(d, "d_lo", "event", required=True), _real(d, "d_hi", "event", required=True)
        if not lo < hi:
            _fail("event interval requires d_lo < d_hi")
        return EventSpec(kind, d_lo=lo, d_hi=hi)
    if kind == "projector":
        if not system.is_finite:
            _fail("event.kind projector needs a finite system")
        p = _cmatrix(d.get("projector"), "event.projector")
        if p.shape != system.hamiltonian.shape:
            _fail("event.projector dimension must match system.hamiltonian")
        if np.max(np.abs(p - p.conj().T)) > 1e-12 or np.max(np.abs(p @ p - p)) > 1e-12:
            _fail("event.projector must be a Hermitian idempotent")
        return EventSpec(kind, projector=p)
    _fail("event.kind must be 'interval' or 'projector'")


def _parse_options(d, system, clock):
    _section(d, "options", _OPTIONS)
    hbar = _real(d, "hbar", "options", 1.0)
    eps = _real(d, "epsilon_never", "options", 1e-12)
    dt_max = _real(d, "dt_max", "options")
    if hbar <= 0:
        _fail("options.hbar must be positive")
    if eps <= 0:
        _fail("options.epsilon_never must be positive")
    if dt_max is not None and dt_max <= 0:
        _fail("options.dt_max must be positive")
    flags = {}
    for key in ("compare_flux", "must_occur"):
        v = d.get(key, False)
        if not isinstance(v, bool):
            _fail(f"options.{key} must be true or false")
        flags[key] = v
    if flags["compare_flux"] and system.is_finite:
        _fail("options.compare_flux needs a particle system")
    meas = None
    if "measurement" in d:
        m = _section(d["measurement"], "options.measurement", _MEAS, ("t_a", "basis"))
        if not system.is_finite:
            _fail("options.measurement needs a finite system")
        t_a = _real(m, "t_a", "options.measurement")
        if abs(t_a) > clock.window_T / 2:
            _fail("options.measurement.t_a must lie within the clock window")
        basis = _cmatrix(m["basis"], "options.measurement.basis")
        dim = system.hamiltonian.shape[0]
        if basis.shape != (dim, dim) or np.max(np.abs(basis.conj().T @ basis - np.eye(dim))) > 1e-10:
            _fail("options.measurement.basis must be an orthonormal basis (columns)")
        meas = MeasurementSpec(t_a, basis)
    branches = ()
    if "branches" in d:
        raw = d["branches"]
        if not isinstance(raw, list) or not raw:
            _fail("options.branches must be a non-empty list")
        out = []
        for i, b in enumerate(raw):
            w = f"options.branches[{i}]"
            _section(b, w, _BRANCH, ("weight",))
            if system.is_finite:
                if "initial" not in b:
                    _fail(f"{w}.initial is required for finite systems")
                init = _normalized_vector(b["initial"], f"{w}.initial")
                if init.shape[0] != system.hamiltonian.shape[0]:
                    _fail(f"{w}.initial dimension must match system.hamiltonian")
                out.append(BranchSpec(_complex(b["weight"], f"{w}.weight"), initial=init))
            else:
                if "packets" not in b:
                    _fail(f"{w}.packets is required for particle systems")
                out.append(BranchSpec(_complex(b["weight"], f"{w}.weight"),
                                      packets=_packets(b["packets"], f"{w}.packets")))
        weights = np.array([b.weight for b in out])
        total = np.sum(np.abs(weights) ** 2)
        out = [BranchSpec(b.weight / np.sqrt(total), b.packets, b.initial) for b in out]
        branches = tuple(out)
    checks = Checks()
    if "checks" in d:
        c = _section(d["checks"], "options.checks", _CHECKS)
        checks = Checks(*(_real(c, k, "options.checks") for k in
                          ("flux_l1_max", "flux_l1_min", "peak_time", "peak_tolerance")))
    return Options(hbar, eps, dt_max, flags["compare_flux"], _real(d, "flux_x", "options"),
                   flags["must_occur"], meas, branches, checks)


def parse_scenario(data):
    """Validate an already-loaded mapping and return a :class:`ScenarioConfig`."""
    _section(data, "scenario", _TOP, ("name", "system", "clock", "event"))
    name = data["name"]
    if not isinstance(name, str) or not name:
        _fail("name must be a non-empty string")
    system = _parse_system(data["system"])
    c = _section(data["clock"], "clock", _CLOCK, ("window_T", "n_ticks"))
    window = _real(c, "window_T", "clock")
    if window <= 0:
        _fail("window_T must be positive")
    n_ticks = c["n_ticks"]
    if isinstance(n_ticks, bool) or not isinstance(n_ticks, int) or n_ticks < 2:
        _fail("n_ticks must be an integer >= 2")
    clock = ClockSpec(window, n_ticks)
    event = _parse_event(data["event"], system)
    options = _parse_options(data.get("options") or {}, system, clock)
    if not system.is_finite and not system.packets and not options.branches:
        _fail("system.packets is required unless options.branches is given")
    if system.is_finite and system.initial is None and not options.branches:
        _fail("system.initial is required unless options.branches is given")
    outputs = data.get("outputs", ["json"])
    if not isinstance(outputs, list) or set(outputs) - OUTPUT_KINDS:
        _fail("outputs must be a list drawn from csv, json")
    desc = data.get("description", "")
    if not isinstance(desc, str):
        _fail("description must be a string")
    return ScenarioConfig(name, system, clock, event, options, tuple(outputs), desc,
                          copy.deepcopy(data))


def load_scenario(path):
    """Read and validate a scenario file.

    Raises :class:`ScenarioParseError` (with ``line``/``column``) on malformed
    YAML and :class:`ValidationError` naming the violated invariant otherwise.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read scenario {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        col = mark.column + 1 if mark is not None else None
        where = f" at line {line}, column {col}" if mark is not None else ""
        raise ScenarioParseError(f"{path}: parse error{where}: {getattr(exc, 'problem', exc)}",
                                 line, col) from exc
    return parse_scenario(data)
