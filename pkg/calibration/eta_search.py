"""
Sigmoid step on the yearly demand deviations.

When the simulated price of a year is above the observed one, desired
demand of that year is too high, so its deviation grows; the step is
strictly smaller than 0.01 in magnitude.
"""
import numpy as np

STEP_SCALE = 0.02
STEP_OFFSET = 0.01
# Keeps the logistic strictly inside (0, 1) in floating point.
SIGMOID_EPS = 1e-12
ETA_BOUND = 1.0 - 1e-9


def sigmoid(x):
    values = 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=float)))
    return np.clip(values, SIGMOID_EPS, 1.0 - SIGMOID_EPS)


def eta_delta(observed, simulated, beta: float = 1.0):
    """sigma(beta * (simulated - observed)) * 0.02 - 0.01."""
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    observed = np.asarray(observed, dtype=float)
    simulated = np.asarray(simulated, dtype=float)
    return sigmoid(beta * (simulated - observed)) * STEP_SCALE - STEP_OFFSET


def eta_step(eta, observed, simulated, beta: float = 1.0):
    """
    One update of the deviation(s), clamped to (-1, 1).

    Scalars in, scalar out; arrays are updated element-wise.
    """
    updated = np.clip(np.asarray(eta, dtype=float) + eta_delta(observed, simulated, beta), -ETA_BOUND, ETA_BOUND)
    return float(updated) if updated.ndim == 0 else updated
