"""Scalar activations shared by the reference model and the simulator."""
from __future__ import annotations

import numpy as np
from scipy.special import expit

# Knots for the hardware-style piecewise-linear sigmoid. Values interpolate
# the exact sigmoid except at +/-8 where the curve saturates to 0/1.
_PLA_X = np.array([0.0, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0])
_PLA_Y = np.concatenate([expit(_PLA_X[:-1]), [1.0]])
_PLA_KNOTS = np.concatenate([-_PLA_X[:0:-1], _PLA_X])
_PLA_VALUES = np.concatenate([1.0 - _PLA_Y[:0:-1], _PLA_Y])


def sigmoid_exact(x):
    return expit(x)


def sigmoid_pla(x):
    """Piecewise-linear sigmoid: 0.5 at 0, antisymmetric, clamped to 0/1 at +/-8."""
    x = np.asarray(x)
    out = np.interp(x, _PLA_KNOTS, _PLA_VALUES)
    if x.dtype == np.float32:
        out = out.astype(np.float32)
    return out


def sigmoid(x, mode: str = "exact"):
    if mode == "exact":
        return sigmoid_exact(x)
    if mode == "pla":
        return sigmoid_pla(x)
    raise ValueError(f"unknown sigmoid mode {mode!r}")


def relu(x):
    return np.maximum(x, 0)
