import os
import subprocess
import sys

import numpy as np
import pytest

from pawtime import kernels

BACKENDS = kernels.available_backends()
COMPILED = [name for name in BACKENDS if name != "python"]


def _states(rng, n=17, m=33):
    return np.ascontiguousarray(rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m)))


def test_python_backend_always_available():
    assert "python" in BACKENDS
    assert kernels.BACKEND in BACKENDS


@pytest.mark.parametrize("name", COMPILED)
def test_weighted_abs2_agrees(name, rng):
    st, w = _states(rng), rng.uniform(size=33)
    ref = BACKENDS["python"].weighted_abs2(st, w)
    np.testing.assert_allclose(BACKENDS[name].weighted_abs2(st, w), ref, rtol=1e-13, atol=0)


@pytest.mark.parametrize("name", COMPILED)
def test_multiply_inplace_agrees(name, rng):
    a = _states(rng, 1, 64)[0]
    f = _states(rng, 1, 64)[0]
    b = a.copy()
    BACKENDS["python"].multiply_inplace(a, f)
    BACKENDS[name].multiply_inplace(b, f)
    np.testing.assert_allclose(b, a, rtol=1e-15, atol=0)


@pytest.mark.parametrize("name", COMPILED)
def test_residual_sq_agrees(name, rng):
    st, hs = _states(rng), _states(rng)
    ref = BACKENDS["python"].residual_sq(st, hs, 0.1, 1.3)
    np.testing.assert_allclose(BACKENDS[name].residual_sq(st, hs, 0.1, 1.3), ref, rtol=1e-12, atol=0)


def test_python_kernels_match_numpy_definitions(rng):
    py = BACKENDS["python"]
    st, hs = _states(rng, 6, 4), _states(rng, 6, 4)
    w = rng.uniform(size=4)
    np.testing.assert_allclose(py.weighted_abs2(st, w), (np.abs(st) ** 2) @ w, rtol=1e-14)
    dt, hbar = 0.2, 1.0
    d = (np.roll(st, -1, axis=0) - np.roll(st, 1, axis=0)) / (2 * dt)
    expected = np.sum(np.abs(1j * hbar * d - hs) ** 2, axis=1)
    np.testing.assert_allclose(py.residual_sq(st, hs, dt, hbar), expected, rtol=1e-13)


def test_env_var_forces_python_backend():
    env = dict(os.environ, PAWTIME_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import pawtime; print(pawtime.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
