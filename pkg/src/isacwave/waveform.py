"""OFDM, LFM pulse train, and partial-time superimposed waveform synthesis.

The composite transmit signal is ``sqrt(1 - w) * s + sqrt(w) * c`` where
``s`` is a gated LFM pulse train (unit power inside each pulse) and ``c``
is a continuous unit-power OFDM signal. One LFM pulse rides on each OFDM
symbol; the pulse repetition interval equals the symbol duration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .signal import ComplexSignal
from .validation import (
    check_in_unit_interval,
    check_nonnegative_int,
    check_positive,
)

_QPSK_LEVELS = np.array([1.0, -1.0]) / np.sqrt(2.0)  # bit 0 -> +, bit 1 -> -
_QAM16_LEVELS = np.array([-3.0, -1.0, 1.0, 3.0]) / np.sqrt(10.0)
_QAM16_GRAY = {(0, 0): 0, (0, 1): 1, (1, 1): 2, (1, 0): 3}
_QAM16_UNGRAY = {v: k for k, v in _QAM16_GRAY.items()}

BITS_PER_SYMBOL = {"qpsk": 2, "16qam": 4}


@dataclass
class OfdmConfig:
    """Continuous OFDM component parameters."""

    n_subcarriers: int
    n_symbols: int
    subcarrier_spacing: float
    constellation: str = "qpsk"

    def __post_init__(self):
        self.n_subcarriers = check_nonnegative_int(self.n_subcarriers, "n_subcarriers", 2)
        self.n_symbols = check_nonnegative_int(self.n_symbols, "n_symbols", 1)
        self.subcarrier_spacing = check_positive(self.subcarrier_spacing, "subcarrier_spacing")
        if self.constellation not in BITS_PER_SYMBOL:
            raise ValueError(f"unknown constellation {self.constellation!r}")

    @property
    def symbol_duration(self) -> float:
        return 1.0 / self.subcarrier_spacing

    @property
    def bits_per_symbol(self) -> int:
        return BITS_PER_SYMBOL[self.constellation]

    @property
    def payload_bits(self) -> int:
        return self.n_symbols * self.n_subcarriers * self.bits_per_symbol


@dataclass
class LfmConfig:
    """Pulsed LFM component parameters (pulse width below the PRI)."""

    initial_frequency: float
    chirp_rate: float
    amplitude: float = 1.0
    pulse_width: float = 2e-6
    pulse_repetition_interval: float = 2.56e-6
    n_pulses: int = 1

    def __post_init__(self):
        self.pulse_width = check_positive(self.pulse_width, "pulse_width")
        self.pulse_repetition_interval = check_positive(
            self.pulse_repetition_interval, "pulse_repetition_interval"
        )
        if self.pulse_width >= self.pulse_repetition_interval:
            raise ValueError("pulse_width must be smaller than the repetition interval")
        if self.amplitude <= 0:
            raise ValueError("amplitude must be positive")
        self.n_pulses = check_nonnegative_int(self.n_pulses, "n_pulses", 1)

    @property
    def duty_cycle(self) -> float:
        return self.pulse_width / self.pulse_repetition_interval

    @property
    def sweep_end_frequency(self) -> float:
        return self.initial_frequency + self.chirp_rate * self.pulse_width


@dataclass
class IsacConfig:
    """Full transmit configuration: OFDM + LFM + power weighting."""

    ofdm: OfdmConfig
    lfm: LfmConfig
    weight: float
    sample_rate: float
    total_power: float = 1.0

    def __post_init__(self):
        self.weight = check_in_unit_interval(self.weight, "weight")
        self.sample_rate = check_positive(self.sample_rate, "sample_rate")
        self.total_power = check_positive(self.total_power, "total_power")
        t_sym = self.ofdm.symbol_duration
        t_pri = self.lfm.pulse_repetition_interval
        if abs(t_sym - t_pri) > 1e-9 * t_pri:
            raise ValueError(
                "OFDM symbol duration must equal the LFM pulse repetition interval"
            )
        if self.ofdm.n_symbols != self.lfm.n_pulses:
            raise ValueError("n_symbols must equal n_pulses")
        if self.sample_rate < 2.0 * self.lfm.sweep_end_frequency:
            raise ValueError(
                "sample_rate must cover twice the LFM sweep end frequency"
            )

    @property
    def samples_per_interval(self) -> int:
        n = self.lfm.pulse_repetition_interval * self.sample_rate
        if abs(n - round(n)) > 1e-6:
            raise ValueError("pulse repetition interval is not a whole number of samples")
        return int(round(n))

    @property
    def samples_per_pulse(self) -> int:
        return int(np.ceil(self.lfm.pulse_width * self.sample_rate - 1e-9))


def map_bits(bits: np.ndarray, constellation: str = "qpsk") -> np.ndarray:
    """Gray-map a bit sequence to unit-mean-power constellation points."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("payload must contain only 0/1 bits")
    bps = BITS_PER_SYMBOL[constellation]
    if bits.size % bps:
        raise ValueError(f"bit count {bits.size} is not a multiple of {bps}")
    pairs = bits.reshape(-1, bps)
    if constellation == "qpsk":
        return _QPSK_LEVELS[pairs[:, 0]] + 1j * _QPSK_LEVELS[pairs[:, 1]]
    idx_i = np.array([_QAM16_GRAY[(a, b)] for a, b in pairs[:, :2]])
    idx_q = np.array([_QAM16_GRAY[(a, b)] for a, b in pairs[:, 2:]])
    return _QAM16_LEVELS[idx_i] + 1j * _QAM16_LEVELS[idx_q]


def demap_symbols(symbols: np.ndarray, constellation: str = "qpsk") -> np.ndarray:
    """Hard-decision Gray demapping back to bits."""
    s = np.asarray(symbols).ravel()
    if constellation == "qpsk":
        bits = np.empty((s.size, 2), dtype=np.int64)
        bits[:, 0] = (s.real < 0).astype(np.int64)
        bits[:, 1] = (s.imag < 0).astype(np.int64)
        return bits.ravel()
    bits = np.empty((s.size, 4), dtype=np.int64)
    for col, axis in ((0, s.real), (2, s.imag)):
        idx = np.argmin(np.abs(axis[:, None] - _QAM16_LEVELS[None, :]), axis=1)
        pairs = np.array([_QAM16_UNGRAY[i] for i in idx])
        bits[:, col : col + 2] = pairs
    return bits.ravel()


def random_payload(config: OfdmConfig, seed: int) -> np.ndarray:
    """Deterministic random bit payload sized for ``config``."""
    rng = np.random.default_rng(seed)
    return rng.integers(0, 2, size=config.payload_bits)


def _samples_per_symbol(config: OfdmConfig, sample_rate: float) -> int:
    n = config.symbol_duration * sample_rate
    if abs(n - round(n)) > 1e-6:
        raise ValueError("symbol duration is not a whole number of samples")
    n = int(round(n))
    if n < config.n_subcarriers:
        raise ValueError("sample_rate too low for the subcarrier count")
    return n


def modulate_ofdm(
    config: OfdmConfig, payload: np.ndarray, sample_rate: float
) -> ComplexSignal:
    """Concatenated OFDM symbols, each an oversampled IDFT of the mapped bits.

    Subcarrier k of symbol m occupies frequency k * subcarrier_spacing; the
    time signal has unit mean power for a unit-power constellation.
    """
    payload = np.asarray(payload).ravel()
    if payload.size != config.payload_bits:
        raise ValueError(
            f"payload has {payload.size} bits, config requires {config.payload_bits}"
        )
    n_sym = _samples_per_symbol(config, sample_rate)
    symbols = map_bits(payload, config.constellation).reshape(
        config.n_symbols, config.n_subcarriers
    )
    spectrum = np.zeros((config.n_symbols, n_sym), dtype=np.complex128)
    spectrum[:, : config.n_subcarriers] = symbols
    time = np.fft.ifft(spectrum, axis=1) * (n_sym / np.sqrt(config.n_subcarriers))
    return ComplexSignal(time.ravel(), sample_rate)


def ofdm_subcarrier_values(
    signal: ComplexSignal, config: OfdmConfig
) -> np.ndarray:
    """Per-symbol DFT of the received stream, scaled to constellation units.

    Returns an (n_symbols, n_subcarriers) matrix; inverse of
    :func:`modulate_ofdm` in a noiseless, channel-free path.
    """
    n_sym = _samples_per_symbol(config, signal.sample_rate)
    x = signal.samples
    if x.size != config.n_symbols * n_sym:
        raise ValueError("signal length does not match the OFDM frame")
    blocks = x.reshape(config.n_symbols, n_sym)
    spectrum = np.fft.fft(blocks, axis=1) * (np.sqrt(config.n_subcarriers) / n_sym)
    return spectrum[:, : config.n_subcarriers]


def demodulate_ofdm(
    signal: ComplexSignal, config: OfdmConfig, channel_response: np.ndarray | None = None
) -> np.ndarray:
    """Recover bits, optionally zero-forcing with a per-subcarrier response."""
    values = ofdm_subcarrier_values(signal, config)
    if channel_response is not None:
        values = values / np.asarray(channel_response)[None, :]
    return demap_symbols(values.ravel(), config.constellation)


def generate_lfm(config: LfmConfig, sample_rate: float) -> ComplexSignal:
    """Gated LFM pulse train; each pulse restarts its phase at zero."""
    n_pri = config.pulse_repetition_interval * sample_rate
    if abs(n_pri - round(n_pri)) > 1e-6:
        raise ValueError("pulse repetition interval is not a whole number of samples")
    n_pri = int(round(n_pri))
    n_pulse = int(np.ceil(config.pulse_width * sample_rate - 1e-9))
    if n_pulse < 2:
        raise ValueError("sample_rate too low: fewer than 2 samples per pulse")
    t = np.arange(n_pulse) / sample_rate
    pulse = config.amplitude * np.exp(
        2j * np.pi * (config.initial_frequency * t + 0.5 * config.chirp_rate * t**2)
    )
    frame = np.zeros(config.n_pulses * n_pri, dtype=np.complex128)
    for m in range(config.n_pulses):
        frame[m * n_pri : m * n_pri + n_pulse] = pulse
    return ComplexSignal(frame, sample_rate)


def superimpose(lfm: ComplexSignal, ofdm: ComplexSignal, w: float) -> ComplexSignal:
    """Power-weighted sum sqrt(1 - w) * lfm + sqrt(w) * ofdm."""
    w = check_in_unit_interval(w, "w")
    if len(lfm) != len(ofdm):
        raise ValueError("component lengths differ")
    if lfm.sample_rate != ofdm.sample_rate:
        raise ValueError("component sample rates differ")
    x = np.sqrt(1.0 - w) * lfm.samples + np.sqrt(w) * ofdm.samples
    return ComplexSignal(x, lfm.sample_rate)


def gate_sensing(x: ComplexSignal, lfm: LfmConfig) -> ComplexSignal:
    """Zero every sample outside the per-interval pulse windows."""
    n_pri = lfm.pulse_repetition_interval * x.sample_rate
    if abs(n_pri - round(n_pri)) > 1e-6:
        raise ValueError("pulse repetition interval is not a whole number of samples")
    n_pri = int(round(n_pri))
    if len(x) % n_pri:
        raise ValueError("signal does not span a whole number of repetition intervals")
    n_pulse = int(np.ceil(lfm.pulse_width * x.sample_rate - 1e-9))
    mask = (np.arange(len(x)) % n_pri) < n_pulse
    return ComplexSignal(np.where(mask, x.samples, 0.0), x.sample_rate)


class IsacFrame(NamedTuple):
    """Synthesized transmit frame and its components."""

    composite: ComplexSignal
    lfm: ComplexSignal
    ofdm: ComplexSignal
    payload: np.ndarray


def make_isac_frame(config: IsacConfig, payload: np.ndarray | None = None, seed: int = 0) -> IsacFrame:
    """Build the weighted transmit signal of a full frame.

    Components are scaled so the in-pulse composite power equals
    ``total_power``; outside the pulse windows only the OFDM part radiates.
    """
    if payload is None:
        payload = random_payload(config.ofdm, seed)
    scale = np.sqrt(config.total_power)
    lfm = generate_lfm(config.lfm, config.sample_rate)
    lfm = lfm.with_samples(lfm.samples * scale)
    ofdm = modulate_ofdm(config.ofdm, payload, config.sample_rate)
    ofdm = ofdm.with_samples(ofdm.samples * scale)
    composite = superimpose(lfm, ofdm, config.weight)
    return IsacFrame(composite, lfm, ofdm, payload)
