"""Minimum forecast horizon detection for rolling-horizon storage scheduling."""

__version__ = "0.1.0"
