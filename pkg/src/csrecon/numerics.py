"""Dense float64 matrix helpers and a from-scratch Adam optimizer.

Matrices are plain 2-D ``numpy.ndarray`` objects of dtype float64. The
optimizer is written out explicitly (no framework optimizer) so that every
update is inspectable and reproducible.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import NumericError, ParameterError, ShapeError

__all__ = [
    "AdamConfig",
    "AdamState",
    "adam_step",
    "as_matrix",
    "l1_norm",
    "matmul",
    "sign_subgradient",
]


def as_matrix(a, name="matrix"):
    """Return ``a`` as a 2-D float64 array with at least one row and column."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={m.ndim}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"{name} must be non-empty, got shape {m.shape}")
    return m


def matmul(a, b):
    """Matrix product with an explicit shape check."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def l1_norm(m):
    """Sum of absolute values of all elements."""
    return float(np.abs(np.asarray(m, dtype=np.float64)).sum())


def sign_subgradient(m):
    """Elementwise sign; the subgradient chosen at zero is zero."""
    return np.sign(np.asarray(m, dtype=np.float64))


@dataclass(frozen=True)
class AdamConfig:
    """Adam hyperparameters.

    Defaults are the usual values from the original optimizer; only the
    learning rate is normally varied (it is set per schedule segment).
    """

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if not 0.0 <= self.beta1 < 1.0:
            raise ParameterError(f"beta1 must be in [0, 1), got {self.beta1}")
        if not 0.0 <= self.beta2 < 1.0:
            raise ParameterError(f"beta2 must be in [0, 1), got {self.beta2}")
        if not self.epsilon > 0.0:
            raise ParameterError(f"epsilon must be positive, got {self.epsilon}")
        if not self.learning_rate > 0.0:
            raise ParameterError(
                f"learning_rate must be positive, got {self.learning_rate}"
            )


@dataclass(frozen=True)
class AdamState:
    """First/second moment accumulators and the number of updates applied."""

    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, shape):
        return cls(np.zeros(shape), np.zeros(shape), 0)

    @property
    def shape(self):
        return self.m.shape


def adam_step(param, grad, state, cfg):
    """Apply one bias-corrected Adam update.

    Parameters
    ----------
    param, grad : ndarray
        Current parameter and its gradient, same shape.
    state : AdamState
        Moments after ``state.step`` prior updates.
    cfg : AdamConfig

    Returns
    -------
    new_param : ndarray
    new_state : AdamState
    """
    param = np.asarray(param, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if not (param.shape == grad.shape == state.m.shape == state.v.shape):
        raise ShapeError(
            f"shape mismatch: param {param.shape}, grad {grad.shape}, "
            f"m {state.m.shape}, v {state.v.shape}"
        )
    if not np.all(np.isfinite(grad)):
        raise NumericError("gradient contains non-finite elements")

    b1, b2 = cfg.beta1, cfg.beta2
    t = state.step + 1
    m = b1 * state.m + (1.0 - b1) * grad
    v = b2 * state.v + (1.0 - b2) * (grad * grad)
    m_hat = m / (1.0 - b1**t)
    v_hat = v / (1.0 - b2**t)
    new_param = param - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
    return new_param, AdamState(m, v, t)
