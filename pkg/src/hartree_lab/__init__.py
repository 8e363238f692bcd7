"""Spectral laboratory for harmonically trapped Hartree-type NLS equations."""

__version__ = "0.1.0"
