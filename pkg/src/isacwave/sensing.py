"""Radar receive chain and ambiguity-function analysis.

Pulse compression, range-Doppler map, peak-based multi-target
estimation, the delay-Doppler ambiguity surface, and PSLR/ISLR
sidelobe scoring.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dsp
from .channel import SPEED_OF_LIGHT
from .signal import ComplexSignal
from .validation import (
    check_complex_matrix,
    check_complex_vector,
    check_nonnegative_int,
    check_positive,
    check_real_vector,
)


@dataclass
class RangeDopplerMap:
    """Doppler (rows) by delay (columns) magnitude surface."""

    magnitudes: np.ndarray
    delay_axis: np.ndarray
    doppler_axis: np.ndarray

    def __post_init__(self):
        self.magnitudes = np.asarray(self.magnitudes, dtype=np.float64)
        self.delay_axis = np.asarray(self.delay_axis, dtype=np.float64)
        self.doppler_axis = np.asarray(self.doppler_axis, dtype=np.float64)
        rows, cols = self.magnitudes.shape
        if self.doppler_axis.size != rows or self.delay_axis.size != cols:
            raise ValueError("axes do not match the map dimensions")


@dataclass
class TargetEstimate:
    distance: float
    velocity: float
    peak_value: float


@dataclass
class AmbiguitySurface:
    """|chi(tau, f_d)| over the requested delay and Doppler grids."""

    values: np.ndarray
    delay_axis: np.ndarray
    doppler_axis: np.ndarray

    def zero_doppler_cut(self) -> np.ndarray:
        row = int(np.argmin(np.abs(self.doppler_axis)))
        return self.values[row, :]

    def zero_delay_cut(self) -> np.ndarray:
        col = int(np.argmin(np.abs(self.delay_axis)))
        return self.values[:, col]


@dataclass
class SidelobeMetrics:
    pslr_db: float
    islr_db: float


def pulse_compress(echoes, reference: ComplexSignal) -> np.ndarray:
    """Matched-filter each pulse; rows cropped to nonnegative lags.

    ``echoes`` is a list of equal-length per-pulse signals or an
    (n_pulses, n_samples) array. Column j of the output is lag j samples,
    so a target at delay d peaks in column round(d * fs).
    """
    if isinstance(echoes, np.ndarray) and echoes.ndim == 2:
        pulses = [echoes[m] for m in range(echoes.shape[0])]
    else:
        pulses = [e.samples if isinstance(e, ComplexSignal) else np.asarray(e) for e in echoes]
    if not pulses:
        raise ValueError("no pulses given")
    n = pulses[0].size
    if any(p.size != n for p in pulses):
        raise ValueError("ragged input: all pulses must have equal length")
    ref = check_complex_vector(reference.samples, "reference")
    out = np.empty((len(pulses), n), dtype=np.complex128)
    for m, p in enumerate(pulses):
        corr = dsp.matched_filter(ComplexSignal(p, reference.sample_rate), ref).samples
        out[m] = corr[ref.size - 1 : ref.size - 1 + n]
    return out


def range_doppler(
    y_pc: np.ndarray,
    sample_rate: float,
    pulse_repetition_interval: float,
    zero_pad: int = 4,
) -> RangeDopplerMap:
    """Column-wise slow-time DFT of the pulse-compressed matrix.

    The Doppler axis spans +-PRF/2 (fftshifted), zero-padded by
    ``zero_pad`` for sub-bin peak readout.
    """
    y_pc = check_complex_matrix(y_pc, "y_pc")
    m, n_lags = y_pc.shape
    if m < 2:
        raise ValueError("at least 2 pulses are required for Doppler resolution")
    check_positive(sample_rate, "sample_rate")
    pri = check_positive(pulse_repetition_interval, "pulse_repetition_interval")
    zero_pad = check_nonnegative_int(zero_pad, "zero_pad", minimum=1)
    n_dop = zero_pad * m
    spectrum = np.fft.fftshift(np.fft.fft(y_pc, n=n_dop, axis=0), axes=0)
    doppler = np.fft.fftshift(np.fft.fftfreq(n_dop, d=pri))
    delay = np.arange(n_lags) / sample_rate
    return RangeDopplerMap(np.abs(spectrum), delay, doppler)


def _parabolic_offset(values: np.ndarray, idx: int) -> float:
    """Sub-bin apex offset from three power samples around ``idx``."""
    if idx <= 0 or idx >= values.size - 1:
        return 0.0
    p0, p1, p2 = values[idx - 1] ** 2, values[idx] ** 2, values[idx + 1] ** 2
    den = p0 - 2 * p1 + p2
    if den == 0:
        return 0.0
    return float(np.clip(0.5 * (p0 - p2) / den, -0.5, 0.5))


def estimate_targets(
    rd_map: RangeDopplerMap,
    n: int,
    carrier_frequency: float,
    chirp_rate: float | None = None,
    min_separation: int = 4,
    interpolate: bool = True,
) -> list[TargetEstimate]:
    """Convert the n strongest map peaks to distance/velocity estimates.

    When ``chirp_rate`` is given, the range-Doppler coupling of an LFM
    reference (a Doppler shift drags the compressed peak by f_d / k) is
    removed from the delay readout.
    """
    check_positive(carrier_frequency, "carrier_frequency")
    peaks = dsp.find_peaks(rd_map.magnitudes, n, min_separation)
    d_delay = rd_map.delay_axis[1] - rd_map.delay_axis[0] if rd_map.delay_axis.size > 1 else 0.0
    d_dop = rd_map.doppler_axis[1] - rd_map.doppler_axis[0] if rd_map.doppler_axis.size > 1 else 0.0
    out = []
    for pk in peaks:
        row, col = pk.row, pk.col
        dr = _parabolic_offset(rd_map.magnitudes[:, col], row) if interpolate else 0.0
        dc = _parabolic_offset(rd_map.magnitudes[row, :], col) if interpolate else 0.0
        doppler = rd_map.doppler_axis[row] + dr * d_dop
        delay = rd_map.delay_axis[col] + dc * d_delay
        if chirp_rate:
            delay = delay + doppler / chirp_rate
        distance = SPEED_OF_LIGHT * delay / 2.0
        velocity = SPEED_OF_LIGHT * doppler / (2.0 * carrier_frequency)
        out.append(TargetEstimate(float(distance), float(velocity), pk.value))
    return out


def ambiguity(x_r: ComplexSignal, delay_grid, doppler_grid) -> AmbiguitySurface:
    """chi(tau, f_d) = sum_t x(t) x*(t - tau) exp(j 2 pi f_d t) dt on a grid.

    Delays are rounded to the nearest sample.
    """
    delays = check_real_vector(np.asarray(delay_grid, dtype=np.float64), "delay_grid")
    dopplers = check_real_vector(np.asarray(doppler_grid, dtype=np.float64), "doppler_grid")
    x = x_r.samples
    n = x.size
    fs = x_r.sample_rate
    shifts = np.round(delays * fs).astype(int)
    prods = np.zeros((n, delays.size), dtype=np.complex128)
    for col, s in enumerate(shifts):
        if s >= 0:
            if s < n:
                prods[s:, col] = x[s:] * np.conj(x[: n - s])
        else:
            if -s < n:
                prods[: n + s, col] = x[: n + s] * np.conj(x[-s:])
    t = np.arange(n) / fs
    phases = np.exp(2j * np.pi * np.outer(dopplers, t)) / fs
    values = np.abs(phases @ prods)
    return AmbiguitySurface(values, delays, dopplers)


def _main_lobe_bounds(cut: np.ndarray, peak: int) -> tuple[int | None, int | None]:
    """First local minima flanking the global peak (None where absent)."""
    left = None
    for i in range(peak - 1, 0, -1):
        if cut[i - 1] >= cut[i]:
            left = i
            break
    right = None
    for i in range(peak + 1, cut.size - 1):
        if cut[i + 1] >= cut[i]:
            right = i
            break
    return left, right


def sidelobe_metrics(cut) -> SidelobeMetrics:
    """PSLR and ISLR of a magnitude cut with a unique global maximum.

    The main lobe is bounded by the first local minima flanking the
    peak; PSLR compares peak powers, ISLR compares the energies split
    at the same boundaries.
    """
    cut = check_real_vector(cut, "cut", min_length=3)
    peak = int(np.argmax(cut))
    if np.count_nonzero(cut == cut[peak]) != 1:
        raise ValueError("cut must have a unique global maximum")
    left, right = _main_lobe_bounds(cut, peak)
    if left is None and right is None:
        raise ValueError("no sidelobe found: the cut is monotone around its peak")
    lo = 0 if left is None else left
    hi = cut.size - 1 if right is None else right
    side = np.concatenate([cut[:lo], cut[hi + 1 :]])
    if side.size == 0 or np.max(side) <= 0:
        raise ValueError("no sidelobe found outside the main lobe")
    main_energy = float(np.sum(cut[lo : hi + 1] ** 2))
    side_energy = float(np.sum(side**2))
    pslr_db = 20.0 * np.log10(np.max(side) / cut[peak])
    islr_db = 10.0 * np.log10(side_energy / main_energy)
    return SidelobeMetrics(float(pslr_db), float(islr_db))
