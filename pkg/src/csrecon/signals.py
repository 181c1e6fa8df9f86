"""Synthetic test signals, slicing, spectra and reconstruction error."""

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import ParameterError, ShapeError, UndefinedMetricError

__all__ = [
    "BENCHMARK_SINUSOIDS",
    "SignalMatrix",
    "SinusoidSpec",
    "amplitude_spectrum",
    "concatenate",
    "generate_sinusoids",
    "reconstruction_error",
    "slice_signal",
    "spectrum_frequencies",
    "symmetry_mismatch",
]


@dataclass(frozen=True)
class SignalMatrix:
    """``N x K`` real samples taken at ``sample_rate`` Hz starting at ``t0``."""

    data: np.ndarray
    sample_rate: float
    channel_names: tuple = field(default=None)
    t0: float = 0.0

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise ShapeError(f"signal data must be a non-empty 2-D array, got {data.shape}")
        if not self.sample_rate > 0:
            raise ParameterError(f"sample_rate must be positive, got {self.sample_rate}")
        names = self.channel_names
        if names is None:
            names = tuple(f"ch{i + 1}" for i in range(data.shape[1]))
        names = tuple(str(c) for c in names)
        if len(names) != data.shape[1]:
            raise ShapeError(f"{len(names)} channel names for {data.shape[1]} channels")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "channel_names", names)

    @property
    def n(self):
        return self.data.shape[0]

    @property
    def k(self):
        return self.data.shape[1]

    @property
    def duration(self):
        return self.n / self.sample_rate

    @property
    def times(self):
        return self.t0 + np.arange(self.n) / self.sample_rate

    def with_data(self, data):
        return replace(self, data=data)

    def select(self, channels):
        """Keep the listed channel indices."""
        channels = list(channels)
        return replace(
            self,
            data=self.data[:, channels],
            channel_names=tuple(self.channel_names[c] for c in channels),
        )


@dataclass(frozen=True)
class SinusoidSpec:
    """``amplitude * cos(2*pi*frequency*t + phase)``, phase in radians."""

    amplitude: float
    frequency: float
    phase: float = 0.0


# five test tones; a sixth channel holds their sum
BENCHMARK_SINUSOIDS = (
    SinusoidSpec(1.0, 10.0, 0.0),
    SinusoidSpec(0.1, 20.0, 0.1 * math.pi),
    SinusoidSpec(0.3, 30.0, 0.3 * math.pi),
    SinusoidSpec(0.5, 40.0, 0.5 * math.pi),
    SinusoidSpec(0.7, 50.0, 0.7 * math.pi),
)


def generate_sinusoids(specs, sample_rate=400.0, duration=20.48, include_superposition=True):
    """Sample one channel per spec at ``t = 0, 1/fs, ...``.

    With ``include_superposition`` an extra channel holding the sum of all
    tones is appended.
    """
    specs = list(specs)
    if not specs:
        raise ParameterError("at least one sinusoid spec is required")
    n_float = duration * sample_rate
    n = int(round(n_float))
    if n < 1 or not math.isclose(n, n_float, rel_tol=0, abs_tol=1e-6):
        raise ParameterError(
            f"duration * sample_rate = {n_float} is not a whole number of samples"
        )
    nyquist = sample_rate / 2.0
    for i, s in enumerate(specs):
        if not 0.0 <= s.frequency < nyquist:
            raise ParameterError(
                f"spec {i}: frequency {s.frequency} Hz outside [0, {nyquist}) Hz"
            )
    t = np.arange(n) / sample_rate
    cols = [s.amplitude * np.cos(2.0 * np.pi * s.frequency * t + s.phase) for s in specs]
    names = [f"s{i + 1}" for i in range(len(specs))]
    if include_superposition:
        cols.append(np.sum(cols, axis=0))
        names.append(f"s{len(specs) + 1}")
    return SignalMatrix(np.column_stack(cols), float(sample_rate), tuple(names), 0.0)


def slice_signal(signal, slice_len):
    """Split into consecutive non-overlapping windows of ``slice_len`` samples.

    A trailing remainder shorter than ``slice_len`` is dropped with a warning.
    """
    if slice_len < 1 or slice_len > signal.n:
        raise ParameterError(f"slice_len must be in [1, {signal.n}], got {slice_len}")
    count, rem = divmod(signal.n, slice_len)
    if rem:
        warnings.warn(
            f"dropping trailing {rem} samples that do not fill a {slice_len}-sample slice",
            stacklevel=2,
        )
    return [
        replace(
            signal,
            data=signal.data[i * slice_len : (i + 1) * slice_len].copy(),
            t0=signal.t0 + i * slice_len / signal.sample_rate,
        )
        for i in range(count)
    ]


def concatenate(slices):
    """Inverse of :func:`slice_signal` for whole slices."""
    if not slices:
        raise ParameterError("nothing to concatenate")
    first = slices[0]
    return replace(first, data=np.vstack([s.data for s in slices]))


def _as_data(u):
    return u.data if isinstance(u, SignalMatrix) else np.asarray(u, dtype=np.float64)


def reconstruction_error(u, u_rec):
    """Per-channel relative l2 error ``|u_k - u_rec_k| / |u_k|``.

    A channel whose reference is identically zero has no defined error; it is
    reported as NaN with a warning.
    """
    a = _as_data(u)
    b = _as_data(u_rec)
    if a.ndim == 1:
        a, b = a[:, None], np.reshape(b, (-1, 1))
    if a.shape != b.shape:
        raise ShapeError(f"shapes differ: {a.shape} vs {b.shape}")
    ref = np.linalg.norm(a, axis=0)
    diff = np.linalg.norm(a - b, axis=0)
    zero = ref == 0.0
    if np.any(zero):
        warnings.warn(
            f"reconstruction error undefined for zero channels {np.flatnonzero(zero).tolist()}",
            RuntimeWarning,
            stacklevel=2,
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(zero, np.nan, diff / np.where(zero, 1.0, ref))


def spectrum_frequencies(n, sample_rate):
    """Frequency (Hz) of each one-sided bin ``0 .. n//2``."""
    return np.arange(n // 2 + 1) * sample_rate / n


def amplitude_spectrum(x_real, x_imag):
    """One-sided amplitude read from synthesis coefficients.

    Bins ``1 .. N/2 - 1`` are doubled and bins ``0`` and ``N/2`` are not, so a
    cosine of amplitude ``A`` reads back as ``A`` at its bin. Returns an array
    of shape ``(N//2 + 1, K)``.
    """
    x_real = np.asarray(x_real, dtype=np.float64)
    x_imag = np.asarray(x_imag, dtype=np.float64)
    if x_real.shape != x_imag.shape or x_real.ndim != 2:
        raise ShapeError("coefficient parts must be 2-D arrays of equal shape")
    n = x_real.shape[0]
    half = n // 2
    mag = np.hypot(x_real[: half + 1], x_imag[: half + 1])
    mag[1:half] *= 2.0
    if n % 2:
        # odd N has no Nyquist bin; the last one-sided bin is a doubled pair
        mag[half] *= 2.0
    return mag


def symmetry_mismatch(x_real, x_imag):
    """How far coefficients are from the conjugate symmetry of a real signal.

    Returns ``(real_mismatch, imag_mismatch)``: the largest deviation from an
    even real part and from an odd imaginary part, each divided by the largest
    magnitude of that part.
    """
    x_real = np.asarray(x_real, dtype=np.float64)
    x_imag = np.asarray(x_imag, dtype=np.float64)
    if x_real.shape != x_imag.shape or x_real.ndim != 2:
        raise ShapeError("coefficient parts must be 2-D arrays of equal shape")
    n = x_real.shape[0]
    if n < 2:
        raise ParameterError("need at least two coefficient rows")
    scale_r = np.abs(x_real).max()
    scale_i = np.abs(x_imag).max()
    if scale_r == 0.0 and scale_i == 0.0:
        raise UndefinedMetricError("symmetry undefined for all-zero coefficients")
    mirror = (n - np.arange(1, n)) % n
    dev_r = np.abs(x_real[1:] - x_real[mirror]).max()
    dev_i = np.abs(x_imag[1:] + x_imag[mirror]).max()
    real_mm = dev_r / scale_r if scale_r > 0 else 0.0
    imag_mm = dev_i / scale_i if scale_i > 0 else 0.0
    return float(real_mm), float(imag_mm)
