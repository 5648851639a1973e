"""Collective-excitation spectra of two coupled anharmonic chains."""

__version__ = "0.1.0"
