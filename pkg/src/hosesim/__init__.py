"""Simulation of a magnetic hose feeding static and pulsed flux into a shielded 3D transmon cavity."""

__version__ = "0.1.0"
