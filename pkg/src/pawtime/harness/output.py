"""Result files: a per-tick CSV table and a JSON mirror of :class:`ResultBundle`.

Both writers go through a temporary file in the target directory and
``os.replace`` so a reader never sees a partial file.
"""

import csv
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from ..errors import PawtimeError

CSV_COLUMNS = ("tick_index", "t_seconds", "prob_mass", "prob_density")


class OutputError(PawtimeError, OSError):
    pass


def _fmt(x):
    return format(float(x), ".17g")


def _plain(value):
    """Convert numpy containers and scalars into JSON-safe Python values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        # JSON has no NaN/inf; keep the information as a string
        return v if math.isfinite(v) else str(v)
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


def bundle_to_dict(bundle, include_version=True):
    """Field-for-field dictionary of a bundle; ``include_version=False`` drops the version."""
    out = {
        "scenario": bundle.scenario,
        "config_hash": bundle.config_hash,
        "status": bundle.status,
        "message": bundle.message,
        "distribution": None,
        "moments": None,
        "flux": None,
        "comparison": _plain(bundle.comparison),
        "diagnostics": _plain(bundle.diagnostics),
        "measurement": _plain(bundle.measurement),
        "verification": _plain(bundle.verification),
    }
    d = bundle.distribution
    if d is not None:
        out["distribution"] = {
            "window_T": d.window_T,
            "n_ticks": d.grid.n_ticks,
            "dwell_time": d.dwell_time,
            "arrival_probability": d.arrival_probability,
            "tick_times": _plain(d.tick_times),
            "probs": _plain(d.probs),
        }
    m = bundle.moments
    if m is not None:
        out["moments"] = _plain({k: getattr(m, k) for k in
                                 ("mean_T1", "mean_T2", "alpha", "t_ev", "var_t_ev")})
    f = bundle.flux
    if f is not None:
        out["flux"] = {
            "x_D": f.x_D,
            "clipped_fraction": f.clipped_fraction,
            "current": _plain(f.current),
            "probs": _plain(f.probs),
        }
    if include_version:
        out["engine_version"] = bundle.engine_version
    return out


def _atomic_write(path, text):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise OutputError(f"cannot write {path}: {exc}") from exc
    return path


def _csv_text(bundle):
    d = bundle.distribution
    lines = [",".join(CSV_COLUMNS)]
    if d is not None:
        t, mass, dens = d.tick_times, d.probs, d.density
        lines += [f"{j},{_fmt(t[j])},{_fmt(mass[j])},{_fmt(dens[j])}" for j in range(len(mass))]
    return "\n".join(lines) + "\n"


def emit(bundle, fmt, path):
    """Write ``bundle`` to ``path`` as ``"csv"`` or ``"json"``.

    A bundle without a distribution (the event never occurs) gives a CSV
    with only the header row; its JSON carries the status and message.
    """
    if fmt == "csv":
        return _atomic_write(path, _csv_text(bundle))
    if fmt == "json":
        text = json.dumps(bundle_to_dict(bundle), indent=2, allow_nan=False) + "\n"
        return _atomic_write(path, text)
    raise ValueError(f"unknown output format {fmt!r}")


def read_csv_masses(path):
    """Read back ``(tick_index, t_seconds, prob_mass, prob_density)`` columns."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"{path} does not have the expected header")
    body = rows[1:]
    idx = np.array([int(r[0]) for r in body], dtype=np.int64)
    vals = np.array([[float(v) for v in r[1:]] for r in body], dtype=np.float64).reshape(-1, 3)
    return idx, vals[:, 0], vals[:, 1], vals[:, 2]
