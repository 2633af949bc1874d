"""Optical quantum gates in coupled quantum dots: single-bit gate, CNOT and phonon limits."""

__version__ = "0.1.0"
