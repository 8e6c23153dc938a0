"""Tunnelling and phase-kick decoherence in a 1D double-well optical lattice."""

__version__ = "0.1.0"
