"""Partial-time superimposed ISAC waveform simulation library."""

from .signal import ComplexSignal

__version__ = "0.1.0"

__all__ = ["ComplexSignal", "__version__"]
