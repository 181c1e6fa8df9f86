import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csrecon.exceptions import ParameterError, ShapeError, UndefinedMetricError
from csrecon.signals import (
    BENCHMARK_SINUSOIDS,
    SignalMatrix,
    SinusoidSpec,
    amplitude_spectrum,
    concatenate,
    generate_sinusoids,
    reconstruction_error,
    slice_signal,
    spectrum_frequencies,
    symmetry_mismatch,
)


@pytest.fixture(scope="module")
def bench_signal():
    return generate_sinusoids(BENCHMARK_SINUSOIDS, 400.0, 20.48, True)


def test_benchmark_specs():
    got = [(s.amplitude, s.frequency, s.phase / math.pi) for s in BENCHMARK_SINUSOIDS]
    assert got == pytest.approx([(1, 10, 0), (0.1, 20, 0.1), (0.3, 30, 0.3), (0.5, 40, 0.5), (0.7, 50, 0.7)])


def test_bench_signal_shape_and_sum(bench_signal):
    assert bench_signal.data.shape == (8192, 6)
    np.testing.assert_allclose(bench_signal.data[:, 5], bench_signal.data[:, :5].sum(axis=1), atol=1e-14)
    assert bench_signal.duration == pytest.approx(20.48)


def test_value_at_t0(bench_signal):
    expect = [s.amplitude * math.cos(s.phase) for s in BENCHMARK_SINUSOIDS]
    np.testing.assert_allclose(bench_signal.data[0, :5], expect, atol=1e-15)


def test_closed_form_samples(bench_signal):
    t = np.arange(8192) / 400.0
    s3 = BENCHMARK_SINUSOIDS[2]
    np.testing.assert_allclose(bench_signal.data[:, 2], 0.3 * np.cos(2 * np.pi * 30 * t + 0.3 * np.pi), atol=1e-12)
    assert s3.amplitude == 0.3


def test_dc_channel():
    sig = generate_sinusoids([SinusoidSpec(1.0, 0.0, 0.0)], 10.0, 1.0, False)
    np.testing.assert_array_equal(sig.data, np.ones((10, 1)))


def test_nyquist_rejected():
    with pytest.raises(ParameterError):
        generate_sinusoids([SinusoidSpec(1.0, 200.0)], 400.0, 1.0)


def test_fractional_samples_rejected():
    with pytest.raises(ParameterError):
        generate_sinusoids([SinusoidSpec(1.0, 1.0)], 10.0, 1.05)


def test_empty_specs_rejected():
    with pytest.raises(ParameterError):
        generate_sinusoids([], 10.0, 1.0)


def test_slices(bench_signal):
    parts = slice_signal(bench_signal, 2048)
    assert len(parts) == 4
    assert [p.t0 for p in parts] == pytest.approx([0, 5.12, 10.24, 15.36])
    np.testing.assert_array_equal(concatenate(parts).data, bench_signal.data)


def test_slice_whole(bench_signal):
    (only,) = slice_signal(bench_signal, bench_signal.n)
    np.testing.assert_array_equal(only.data, bench_signal.data)


def test_slice_remainder_warns():
    sig = SignalMatrix(np.arange(10.0), 1.0)
    with pytest.warns(UserWarning, match="dropping trailing 1"):
        parts = slice_signal(sig, 3)
    assert len(parts) == 3


def test_slice_too_long():
    with pytest.raises(ParameterError):
        slice_signal(SignalMatrix(np.ones(4), 1.0), 5)


@settings(max_examples=25)
@given(st.integers(1, 6), st.integers(1, 5))
def test_slice_concatenate_identity(count, length):
    data = np.random.default_rng(count * 10 + length).standard_normal((count * length, 2))
    sig = SignalMatrix(data, 2.0)
    np.testing.assert_array_equal(concatenate(slice_signal(sig, length)).data, data)


def test_reconstruction_error_basic():
    u = np.random.default_rng(0).standard_normal((50, 3))
    np.testing.assert_array_equal(reconstruction_error(u, u), np.zeros(3))
    np.testing.assert_allclose(reconstruction_error(u, np.zeros_like(u)), np.ones(3))


def test_reconstruction_error_zero_channel():
    u = np.ones((5, 2))
    u[:, 1] = 0
    with pytest.warns(RuntimeWarning):
        xi = reconstruction_error(u, u * 0.5)
    assert xi[0] == pytest.approx(0.5) and np.isnan(xi[1])


def test_reconstruction_error_shape():
    with pytest.raises(ShapeError):
        reconstruction_error(np.ones((3, 2)), np.ones((3, 1)))


@given(st.floats(0.1, 10), st.permutations(range(4)))
def test_reconstruction_error_invariances(alpha, perm):
    rng = np.random.default_rng(11)
    u, r = rng.standard_normal((40, 4)), rng.standard_normal((40, 4))
    base = reconstruction_error(u, r)
    np.testing.assert_allclose(reconstruction_error(alpha * u, alpha * r), base, rtol=1e-12)
    np.testing.assert_allclose(reconstruction_error(u[:, perm], r[:, perm]), base[list(perm)], rtol=1e-12)


def test_scale_invariance_example():
    rng = np.random.default_rng(12)
    u, r = rng.standard_normal((30, 2)), rng.standard_normal((30, 2))
    np.testing.assert_allclose(reconstruction_error(3.7 * u, 3.7 * r), reconstruction_error(u, r), rtol=1e-12)


def test_spectrum_zero():
    assert not amplitude_spectrum(np.zeros((8, 2)), np.zeros((8, 2))).any()


def test_spectrum_reads_cosine_amplitude():
    n, fs = 64, 64.0
    xr = np.zeros((n, 1))
    xr[10] = xr[n - 10] = 0.5
    spec = amplitude_spectrum(xr, np.zeros_like(xr))
    freqs = spectrum_frequencies(n, fs)
    assert spec.shape == (33, 1)
    assert freqs[10] == 10.0
    assert spec[10, 0] == pytest.approx(1.0)
    assert spec.sum() == pytest.approx(1.0)


def test_spectrum_of_dft_of_tone():
    # oracle: exact DFT of a bin-aligned tone puts A/2 in two conjugate bins
    n, fs = 64, 64.0
    t = np.arange(n) / fs
    u = 0.7 * np.cos(2 * np.pi * 5 * t + 0.3)
    x = np.fft.fft(u) / n
    nz = np.flatnonzero(np.abs(x) > 1e-12)
    assert nz.tolist() == [5, n - 5]
    spec = amplitude_spectrum(x.real[:, None], x.imag[:, None])
    assert spec[5, 0] == pytest.approx(0.7, abs=1e-12)
    assert spec[0, 0] < 1e-12 and spec[32, 0] < 1e-12


def test_spectrum_dc_and_nyquist_not_doubled():
    n = 8
    xr = np.zeros((n, 1))
    xr[0] = 2.0
    xr[4] = 3.0
    spec = amplitude_spectrum(xr, np.zeros_like(xr))
    assert spec[0, 0] == 2.0 and spec[4, 0] == 3.0


def test_symmetry_mismatch_examples():
    n = 8
    z = np.zeros((n, 1))
    xr = z.copy()
    xr[1] = xr[n - 1] = 0.4
    xi = z.copy()
    xi[1], xi[n - 1] = 1.0, -1.0
    assert symmetry_mismatch(xr, xi) == (0.0, 0.0)

    xr = z.copy()
    xr[1] = 1.0
    assert symmetry_mismatch(xr, z) == (1.0, 0.0)


def test_symmetry_of_real_signal_dft():
    u = np.random.default_rng(3).standard_normal((32, 2))
    x = np.fft.fft(u, axis=0) / 32
    r, i = symmetry_mismatch(x.real, x.imag)
    assert r < 1e-12 and i < 1e-12


def test_symmetry_all_zero():
    with pytest.raises(UndefinedMetricError):
        symmetry_mismatch(np.zeros((4, 1)), np.zeros((4, 1)))
