"""Multipath FIR channel, AWGN, and delay-Doppler echo synthesis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signal import ComplexSignal
from .validation import check_complex_vector, check_nonnegative_int, check_positive

SPEED_OF_LIGHT = 299_792_458.0

NOISE_REFERENCES = ("total_transmit", "sensing_component")


@dataclass
class MultipathChannel:
    """FIR channel taps at one-sample spacing, normalized to unit energy
    by :func:`random_channel` (arbitrary taps are accepted as given)."""

    taps: np.ndarray

    def __post_init__(self):
        self.taps = check_complex_vector(self.taps, "taps")

    def __len__(self):
        return self.taps.size

    def frequency_response(self, n_bins: int, bins: np.ndarray | None = None) -> np.ndarray:
        """Response at DFT bin frequencies k / n_bins (cycles per sample)."""
        k = np.arange(n_bins) if bins is None else np.asarray(bins)
        l = np.arange(self.taps.size)
        return np.exp(-2j * np.pi * np.outer(k, l) / n_bins) @ self.taps


@dataclass
class SensingTarget:
    """Point scatterer at distance (m) moving at velocity (m/s)."""

    distance: float
    velocity: float
    reflectivity: complex = 1.0 + 0.0j

    def __post_init__(self):
        self.distance = check_positive(self.distance, "distance")
        if abs(self.velocity) >= SPEED_OF_LIGHT:
            raise ValueError("velocity must be below the speed of light")

    @property
    def delay(self) -> float:
        """Round-trip delay 2 d / c."""
        return 2.0 * self.distance / SPEED_OF_LIGHT

    def doppler(self, carrier_frequency: float) -> float:
        """Doppler shift 2 v f0 / c."""
        return 2.0 * self.velocity * carrier_frequency / SPEED_OF_LIGHT


@dataclass
class NoiseSpec:
    """SNR in dB measured against ``reference_power`` of the named signal."""

    snr_db: float
    reference: str = "total_transmit"
    reference_power: float = 1.0

    def __post_init__(self):
        if self.reference not in NOISE_REFERENCES:
            raise ValueError(f"reference must be one of {NOISE_REFERENCES}")
        self.reference_power = check_positive(self.reference_power, "reference_power")

    @property
    def noise_power(self) -> float:
        if np.isinf(self.snr_db):
            return 0.0
        return self.reference_power * 10.0 ** (-self.snr_db / 10.0)


def random_channel(l: int, seed: int) -> MultipathChannel:
    """I.i.d. circular Gaussian taps normalized so sum |h|^2 = 1."""
    l = check_nonnegative_int(l, "l", minimum=1)
    rng = np.random.default_rng(seed)
    taps = (rng.standard_normal(l) + 1j * rng.standard_normal(l)) / np.sqrt(2.0)
    return MultipathChannel(taps / np.linalg.norm(taps))


def apply_multipath(x: ComplexSignal, ch: MultipathChannel) -> ComplexSignal:
    """Linear convolution with the channel taps, truncated to input length."""
    if len(x) < len(ch):
        raise ValueError("signal shorter than the channel impulse response")
    y = np.convolve(x.samples, ch.taps)[: len(x)]
    return ComplexSignal(y, x.sample_rate)


def synthesize_echo(
    x_r: ComplexSignal,
    targets: list[SensingTarget] | SensingTarget,
    carrier_frequency: float,
    time_offset: float = 0.0,
) -> ComplexSignal:
    """Superposed target echoes with exact intra-pulse Doppler.

    Each target contributes ``gain * x_r(t - t_n) * exp(j 2 pi f_d (t - t_n))``
    with the delay rounded to the nearest sample. ``time_offset`` shifts the
    absolute time axis, so per-interval segments of a long stream can be
    synthesized independently while keeping slow-time Doppler phase coherent.
    """
    if isinstance(targets, SensingTarget):
        targets = [targets]
    if not targets:
        raise ValueError("at least one target required")
    check_positive(carrier_frequency, "carrier_frequency")
    n = len(x_r)
    fs = x_r.sample_rate
    t_abs = np.arange(n) / fs + time_offset
    echo = np.zeros(n, dtype=np.complex128)
    for tgt in targets:
        shift = int(round(tgt.delay * fs))
        if shift >= n:
            raise ValueError(
                f"target at {tgt.distance} m delays beyond the signal span"
            )
        delayed = np.zeros(n, dtype=np.complex128)
        delayed[shift:] = x_r.samples[: n - shift]
        f_d = tgt.doppler(carrier_frequency)
        echo += tgt.reflectivity * delayed * np.exp(
            2j * np.pi * f_d * (t_abs - tgt.delay)
        )
    return ComplexSignal(echo, fs)


def add_awgn(x: ComplexSignal, spec: NoiseSpec, seed: int) -> ComplexSignal:
    """Add circular complex Gaussian noise at the configured SNR."""
    sigma2 = spec.noise_power
    if sigma2 == 0.0:
        return ComplexSignal(x.samples.copy(), x.sample_rate)
    rng = np.random.default_rng(seed)
    n = len(x)
    noise = np.sqrt(sigma2 / 2.0) * (
        rng.standard_normal(n) + 1j * rng.standard_normal(n)
    )
    return ComplexSignal(x.samples + noise, x.sample_rate)
