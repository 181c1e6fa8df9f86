"""Row-blocked generation of the complex synthesis basis.

The Fourier basis is ``psi[n, k] = exp(+2j*pi*n*k/N)`` with no ``1/N``
factor, so a signal is synthesized as ``u = psi @ x``. A cosine of amplitude
``A`` on an exact bin therefore shows up as coefficient magnitude ``A/2`` at
each of the two conjugate bins.

Rows are produced on demand, in blocks, and never cached: at no point does
the full ``N x N`` matrix need to be resident.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError, RangeError, ShapeError

__all__ = ["BasisSpec", "BasisRowBlock", "basis_block", "basis_rows", "synthesize"]

_KINDS = ("fourier", "identity")


@dataclass(frozen=True)
class BasisSpec:
    """Basis of size ``n``; ``kind`` is ``"fourier"`` or ``"identity"``."""

    n: int
    kind: str = "fourier"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ParameterError(f"basis size must be an integer >= 2, got {self.n}")
        if self.kind not in _KINDS:
            raise ParameterError(f"unknown basis kind {self.kind!r}; expected {_KINDS}")

    def dense(self):
        """Full complex matrix. Test-scale helper only."""
        blk = basis_block(self, 0, self.n)
        return blk.real + 1j * blk.imag


@dataclass(frozen=True)
class BasisRowBlock:
    """Real and imaginary parts of a set of basis rows.

    ``rows`` holds the absolute row indices; a contiguous block has
    ``rows == arange(row_start, row_start + block_rows)``.
    """

    rows: np.ndarray
    real: np.ndarray
    imag: np.ndarray

    @property
    def row_start(self):
        return int(self.rows[0])

    @property
    def block_rows(self):
        return len(self.rows)


def _phase_table(n):
    # cos/sin at the N distinct phases 2*pi*m/N; basis entries index into it
    # with (row*col) mod N, which keeps every entry exact to one rounding.
    m = np.arange(n) * (2.0 * np.pi / n)
    return np.cos(m), np.sin(m)


def basis_rows(spec, rows):
    """Generate the basis rows listed in ``rows`` (any order, any subset)."""
    rows = np.asarray(rows, dtype=np.int64).reshape(-1)
    n = spec.n
    if rows.size == 0:
        raise RangeError("at least one basis row must be requested")
    if rows.min() < 0 or rows.max() >= n:
        raise RangeError(f"rows must lie in [0, {n}), got [{rows.min()}, {rows.max()}]")
    if spec.kind == "identity":
        real = np.zeros((rows.size, n))
        real[np.arange(rows.size), rows] = 1.0
        return BasisRowBlock(rows, real, np.zeros((rows.size, n)))
    cos_t, sin_t = _phase_table(n)
    idx = np.outer(rows, np.arange(n, dtype=np.int64))
    if n & (n - 1) == 0:
        idx &= n - 1
    else:
        idx %= n
    return BasisRowBlock(rows, cos_t[idx], sin_t[idx])


def basis_block(spec, row_start, block_rows):
    """Generate the contiguous rows ``[row_start, row_start + block_rows)``."""
    if block_rows < 1 or row_start < 0 or row_start + block_rows > spec.n:
        raise RangeError(
            f"row range [{row_start}, {row_start + block_rows}) outside [0, {spec.n})"
        )
    return basis_rows(spec, np.arange(row_start, row_start + block_rows))


def synthesize(spec, x_real, x_imag, block_rows=None):
    """Compute ``psi @ (x_real + 1j*x_imag)`` one row block at a time.

    Returns
    -------
    real, imag : ndarray of shape (N, K)
    """
    x_real = np.asarray(x_real, dtype=np.float64)
    x_imag = np.asarray(x_imag, dtype=np.float64)
    n = spec.n
    if x_real.ndim != 2 or x_real.shape != x_imag.shape or x_real.shape[0] != n:
        raise ShapeError(
            f"coefficients must both be ({n}, K); got {x_real.shape} and {x_imag.shape}"
        )
    block_rows = n if block_rows is None else int(block_rows)
    if block_rows < 1:
        raise ParameterError("block_rows must be >= 1")
    out_r = np.empty_like(x_real)
    out_i = np.empty_like(x_imag)
    for start in range(0, n, block_rows):
        blk = basis_block(spec, start, min(block_rows, n - start))
        sl = slice(start, start + blk.block_rows)
        out_r[sl] = blk.real @ x_real - blk.imag @ x_imag
        out_i[sl] = blk.real @ x_imag + blk.imag @ x_real
    return out_r, out_i
