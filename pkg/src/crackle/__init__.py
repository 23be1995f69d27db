"""Crackle detection in stethoscope lung-sound recordings."""

__version__ = "0.1.0"
