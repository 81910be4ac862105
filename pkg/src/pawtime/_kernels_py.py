"""Numpy fallback for the compiled kernels in ``_kernels.pyx``."""

import numpy as np


def weighted_abs2(states, weights):
    states = np.asarray(states)
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape[0] != states.shape[1]:
        raise ValueError("weights length does not match state dimension")
    return (states.real**2 + states.imag**2) @ weights


def multiply_inplace(psi, factor):
    if factor.shape[0] != psi.shape[0]:
        raise ValueError("factor length does not match state dimension")
    np.multiply(psi, factor, out=psi)


def residual_sq(states, h_states, dt, hbar):
    if states.shape != h_states.shape:
        raise ValueError("states and h_states shapes differ")
    deriv = (np.roll(states, -1, axis=0) - np.roll(states, 1, axis=0)) * (hbar / (2.0 * dt))
    r = 1j * deriv - h_states
    return np.sum(r.real**2 + r.imag**2, axis=1)
