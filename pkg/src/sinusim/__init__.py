"""Deterministic haptic sinus-surgery training engine."""

__version__ = "0.1.0"
