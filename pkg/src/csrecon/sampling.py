"""Random 0/1 sampling masks.

Masks are drawn element by element from a Bernoulli distribution using a
counter-based generator (Philox) keyed by the seed, so a transmitter and a
receiver sharing ``(n, k, ratio, seed)`` reproduce the same bits.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError, ShapeError

__all__ = ["MaskMatrix", "apply_mask", "effective_ratio", "generate_mask", "mask_rng"]


@dataclass(frozen=True)
class MaskMatrix:
    """An ``n x k`` array of zeros and ones plus how it was drawn."""

    bits: np.ndarray
    ratio: float = 1.0
    seed: int | None = None
    shared: bool = False

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 2:
            raise ShapeError(f"mask must be 2-D, got ndim={bits.ndim}")
        if not np.all((bits == 0) | (bits == 1)):
            raise ParameterError("mask elements must be 0 or 1")
        object.__setattr__(self, "bits", bits.astype(np.float64))

    @property
    def n(self):
        return self.bits.shape[0]

    @property
    def k(self):
        return self.bits.shape[1]

    @property
    def shape(self):
        return self.bits.shape

    def columns(self, cols):
        """Mask restricted to a subset of channels."""
        return MaskMatrix(self.bits[:, cols], self.ratio, self.seed, self.shared)

    def metadata(self):
        return {
            "n": self.n,
            "k": self.k,
            "ratio": self.ratio,
            "seed": self.seed,
            "shared": self.shared,
        }


def mask_rng(seed):
    """Counter-based generator used for every mask draw."""
    return np.random.Generator(np.random.Philox(seed))


def generate_mask(n, k, ratio, seed, shared=False):
    """Draw an ``n x k`` Bernoulli(``ratio``) mask.

    With ``shared=True`` one column is drawn and repeated across all ``k``
    channels (all sensors keep the same time instants).
    """
    if not 0.0 < ratio <= 1.0:
        raise ParameterError(f"sampling ratio must be in (0, 1], got {ratio}")
    if n < 1 or k < 1:
        raise ParameterError(f"mask dims must be positive, got ({n}, {k})")
    rng = mask_rng(seed)
    if shared:
        col = rng.random((n, 1)) < ratio
        bits = np.repeat(col, k, axis=1)
    else:
        bits = rng.random((n, k)) < ratio
    return MaskMatrix(bits, float(ratio), seed, bool(shared))


def apply_mask(mask, u):
    """Elementwise product; unsampled entries become exactly zero."""
    u = np.asarray(u, dtype=np.float64)
    if u.shape != mask.shape:
        raise ShapeError(f"mask shape {mask.shape} does not match data {u.shape}")
    return np.where(mask.bits == 1.0, u, 0.0)


def effective_ratio(mask):
    """Realized fraction of kept samples."""
    return float(mask.bits.sum() / mask.bits.size)
