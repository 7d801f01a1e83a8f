"""Shared transform and statistics primitives.

Unitary DFT/IDFT, short-time Fourier transform, discrete fractional
Fourier transform (chirp-FFT-chirp fast decomposition), least-squares
line fit, kurtosis, matched-filter correlation, and 2-D peak finding.
All functions are pure; none hold state.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.ndimage
import scipy.signal

from .signal import ComplexSignal
from .validation import (
    check_complex_vector,
    check_nonnegative_int,
    check_real_vector,
)


@dataclass
class Spectrogram:
    """Magnitude spectrogram: one row per window position.

    ``magnitudes[i, k]`` is the spectral magnitude of window ``i`` at
    ``bin_frequencies[k]``. Bin frequencies span [0, sample_rate), i.e.
    the unshifted DFT grid.
    """

    magnitudes: np.ndarray
    window_centers: np.ndarray
    bin_frequencies: np.ndarray

    def __post_init__(self):
        self.magnitudes = np.asarray(self.magnitudes, dtype=np.float64)
        self.window_centers = np.asarray(self.window_centers, dtype=np.float64)
        self.bin_frequencies = np.asarray(self.bin_frequencies, dtype=np.float64)
        n_win, n_bin = self.magnitudes.shape
        if self.window_centers.size != n_win or self.bin_frequencies.size != n_bin:
            raise ValueError("spectrogram axes do not match matrix dimensions")
        if np.any(self.magnitudes < 0):
            raise ValueError("spectrogram magnitudes must be nonnegative")


@dataclass
class FrftResult:
    """Fractional Fourier transform samples over the normalized axis.

    ``values[j]`` sits at u_j = (j - n//2) / sqrt(n) in dimensionless
    units (time axis scaled by sqrt(n)/sample_rate before transforming).
    """

    values: np.ndarray
    order: float
    angle: float

    @property
    def axis(self) -> np.ndarray:
        n = self.values.size
        return (np.arange(n) - n // 2) / np.sqrt(n)


class Peak(NamedTuple):
    row: int
    col: int
    value: float


def dft(signal: ComplexSignal | np.ndarray) -> np.ndarray:
    """Unitary forward DFT (1/sqrt(N) scaling)."""
    x = signal.samples if isinstance(signal, ComplexSignal) else np.asarray(signal)
    x = check_complex_vector(x, "signal")
    return np.fft.fft(x) / np.sqrt(x.size)


def idft(spectrum: np.ndarray) -> np.ndarray:
    """Unitary inverse DFT; ``idft(dft(x)) == x`` up to rounding."""
    x = check_complex_vector(spectrum, "spectrum")
    return np.fft.ifft(x) * np.sqrt(x.size)


def stft(
    signal: ComplexSignal,
    window_len: int,
    hop: int,
    window: str = "hamming",
) -> Spectrogram:
    """Sliding-window magnitude spectrogram.

    Produces ``(N - window_len) // hop + 1`` windows. Peak bins map to
    frequencies on the [0, sample_rate) grid, which keeps a positive
    baseband chirp ridge monotone instead of wrapping at Nyquist.
    """
    x = signal.samples
    n = x.size
    window_len = check_nonnegative_int(window_len, "window_len", minimum=1)
    hop = check_nonnegative_int(hop, "hop", minimum=1)
    if window_len > n:
        raise ValueError(f"window_len {window_len} exceeds signal length {n}")
    win = scipy.signal.get_window(window, window_len, fftbins=True)
    n_windows = (n - window_len) // hop + 1
    starts = hop * np.arange(n_windows)
    frames = np.stack([x[s : s + window_len] for s in starts]) * win
    mags = np.abs(np.fft.fft(frames, axis=1))
    centers = (starts + (window_len - 1) / 2.0) / signal.sample_rate
    freqs = np.arange(window_len) * signal.sample_rate / window_len
    return Spectrogram(mags, centers, freqs)


def _centered_fft(x: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Unitary DFT with the origin at sample n//2 on both axes."""
    n = x.size
    shift = (np.arange(n) + n // 2) % n
    out = np.zeros_like(x)
    if inverse:
        out[shift] = np.fft.ifft(x[shift]) * np.sqrt(n)
    else:
        out[shift] = np.fft.fft(x[shift]) / np.sqrt(n)
    return out


def _time_reverse(x: np.ndarray) -> np.ndarray:
    """Reversal about the transform origin at sample n // 2 (circular)."""
    n = x.size
    return x[(2 * (n // 2) - np.arange(n)) % n]


def _sinc_interpolate(x: np.ndarray) -> np.ndarray:
    """Double the sample rate of ``x`` by bandlimited interpolation."""
    n = x.size
    y = np.zeros(2 * n - 1, dtype=np.complex128)
    y[::2] = x
    kernel = np.sinc(np.arange(-(2 * n - 3), 2 * n - 2) / 2.0)
    interp = scipy.signal.fftconvolve(y, kernel)
    return interp[2 * n - 3 : -2 * n + 3]


def frft(signal: ComplexSignal | np.ndarray, order: float) -> FrftResult:
    """Discrete fractional Fourier transform of order ``p``.

    Integer orders hit exact branches (0: identity, 1: centered unitary
    DFT, 2: time reversal, 3: centered unitary IDFT). Other orders use
    the chirp-multiply / chirp-convolve / chirp-multiply decomposition
    of the A_alpha kernel, reduced to the well conditioned interval
    0.5 <= p <= 1.5 by composing with the exact branches.
    """
    x = signal.samples if isinstance(signal, ComplexSignal) else np.asarray(signal)
    x = check_complex_vector(x, "signal").copy()
    p = float(order)
    n = x.size
    a = np.remainder(p, 4.0)

    if a == 0.0:
        return FrftResult(x, p, p * np.pi / 2)
    if a == 2.0:
        return FrftResult(_time_reverse(x), p, p * np.pi / 2)
    if a == 1.0:
        return FrftResult(_centered_fft(x), p, p * np.pi / 2)
    if a == 3.0:
        return FrftResult(_centered_fft(x, inverse=True), p, p * np.pi / 2)

    if a > 2.0:
        a -= 2.0
        x = _time_reverse(x)
    if a > 1.5:
        a -= 1.0
        x = _centered_fft(x)
    if a < 0.5:
        a += 1.0
        x = _centered_fft(x, inverse=True)

    # Core decomposition for 0.5 <= a <= 1.5 on the 2x oversampled grid.
    alpha = a * np.pi / 2
    tana2 = np.tan(alpha / 2)
    sina = np.sin(alpha)
    xi = np.concatenate(
        [np.zeros(n - 1, dtype=np.complex128), _sinc_interpolate(x), np.zeros(n - 1)]
    )

    # Oversampled index q maps to sample coordinate (q + n - 1) / 2; the
    # quadratic chirps are referenced to the transform origin at sample
    # n // 2, matching the grid of the exact integer-order branches.
    grid = np.arange(-2 * n + 2, 2 * n - 1) - 1
    chirp = np.exp(-1j * np.pi / n * tana2 / 4 * grid**2)
    xi = chirp * xi

    c = np.pi / n / sina / 4
    kernel = np.exp(1j * c * np.arange(-(4 * n - 4), 4 * n - 3) ** 2)
    conv = scipy.signal.fftconvolve(kernel, xi)
    conv = conv[4 * n - 4 : 8 * n - 7] * np.sqrt(c / np.pi)
    conv = chirp * conv

    values = np.exp(-1j * (1 - a) * np.pi / 4) * conv[n - 1 : -n + 1 : 2]
    return FrftResult(values, p, p * np.pi / 2)


def linear_fit(points) -> tuple[float, float]:
    """Least-squares line through ``points``: returns (intercept, slope)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("points must be a sequence of at least 2 (x, y) pairs")
    x, y = pts[:, 0], pts[:, 1]
    if np.ptp(x) == 0:
        raise ValueError("degenerate fit: all abscissae are equal")
    design = np.column_stack([np.ones_like(x), x])
    coeffs, *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(coeffs[0]), float(coeffs[1])


def kurtosis(samples) -> float:
    """Population kurtosis m4 / m2**2 (no excess correction).

    Complex input is evaluated on the concatenation of real and
    imaginary parts, so a circular complex Gaussian still scores 3.
    """
    arr = np.asarray(samples)
    if np.iscomplexobj(arr):
        arr = np.concatenate([arr.real, arr.imag])
    arr = check_real_vector(arr, "samples", min_length=4)
    centered = arr - arr.mean()
    m2 = np.mean(centered**2)
    scale = max(1.0, float(np.max(np.abs(arr))))
    if m2 <= (100 * np.finfo(np.float64).eps * scale) ** 2:
        raise ValueError("kurtosis undefined: sample variance is zero")
    m4 = np.mean(centered**4)
    return float(m4 / m2**2)


def matched_filter(
    signal: ComplexSignal, reference: ComplexSignal | np.ndarray
) -> ComplexSignal:
    """Full cross-correlation of ``signal`` against ``reference``.

    Output index ``i`` corresponds to lag ``i - (len(reference) - 1)``:
    a reference delayed by d samples inside the input peaks at lag d.
    """
    ref = reference.samples if isinstance(reference, ComplexSignal) else reference
    ref = check_complex_vector(ref, "reference")
    x = signal.samples
    if ref.size > x.size:
        raise ValueError("reference must not be longer than the input")
    corr = scipy.signal.fftconvolve(x, np.conj(ref[::-1]))
    return ComplexSignal(corr, signal.sample_rate)


def correlation_lags(n_signal: int, n_reference: int) -> np.ndarray:
    """Lag axis matching :func:`matched_filter` output indices."""
    return np.arange(-(n_reference - 1), n_signal)


def find_peaks(surface, count: int, min_separation: int = 1) -> list[Peak]:
    """Strongest local maxima of a 2-D surface, best first.

    Keeps the ``count`` largest local maxima that are pairwise at least
    ``min_separation`` apart in Chebyshev distance. If fewer qualify a
    warning is issued and the shorter list is returned.
    """
    a = np.asarray(surface, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("surface must be 2-D")
    count = check_nonnegative_int(count, "count", minimum=1)
    min_separation = check_nonnegative_int(min_separation, "min_separation")

    footprint = scipy.ndimage.maximum_filter(a, size=3, mode="constant", cval=-np.inf)
    candidates = np.argwhere((a >= footprint) & (a > a.min()))
    order = np.argsort(a[candidates[:, 0], candidates[:, 1]])[::-1]

    kept: list[Peak] = []
    for idx in order:
        r, c = candidates[idx]
        if all(
            max(abs(r - p.row), abs(c - p.col)) >= min_separation for p in kept
        ):
            kept.append(Peak(int(r), int(c), float(a[r, c])))
            if len(kept) == count:
                break
    if len(kept) < count:
        warnings.warn(
            f"requested {count} peaks but only {len(kept)} local maxima found",
            RuntimeWarning,
            stacklevel=2,
        )
    return kept
