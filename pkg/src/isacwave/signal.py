"""Uniformly sampled complex baseband signal container."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .validation import check_complex_vector, check_positive


@dataclass
class ComplexSignal:
    """A uniformly sampled complex baseband sequence.

    Attributes
    ----------
    samples : np.ndarray
        1-D complex128 array of baseband amplitudes (dimensionless).
    sample_rate : float
        Sampling rate in Hz.
    """

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        self.samples = check_complex_vector(self.samples, "samples")
        self.sample_rate = check_positive(self.sample_rate, "sample_rate")

    def __len__(self):
        return self.samples.size

    @property
    def duration(self) -> float:
        """Signal span in seconds (number of samples over the rate)."""
        return self.samples.size / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        """Sample instants in seconds, starting at t = 0."""
        return np.arange(self.samples.size) / self.sample_rate

    def mean_power(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2))

    def with_samples(self, samples) -> "ComplexSignal":
        """New signal with the same rate and different samples."""
        return ComplexSignal(samples, self.sample_rate)
