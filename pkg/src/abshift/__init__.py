"""Superoscillations evolved by the Aharonov-Bohm propagator."""

__version__ = "0.1.0"
