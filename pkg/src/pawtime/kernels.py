"""Backend selection for the hot loops.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``PAWTIME_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the numpy fallback is used. ``BACKEND`` names the choice.
"""

import os

from . import _kernels_py

_force_py = os.environ.get("PAWTIME_PURE_PYTHON", "") not in ("", "0")

if _force_py:
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

weighted_abs2 = _impl.weighted_abs2
# numpy's vectorized multiply beats the compiled loop at every grid size we
# use (see benchmarks/bench_kernels.py), so both backends share it
multiply_inplace = _kernels_py.multiply_inplace
residual_sq = _impl.residual_sq


def available_backends():
    """Return a dict mapping backend name to kernel module for every importable backend."""
    backends = {"python": _kernels_py}
    try:
        from . import _kernels
        backends["cython"] = _kernels
    except ImportError:
        pass
    return backends
