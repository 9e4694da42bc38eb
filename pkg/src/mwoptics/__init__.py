"""Deterministic few-mode matter-wave optics simulator."""

__version__ = "0.1.0"
