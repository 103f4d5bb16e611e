"""Simulation of quantum absorption refrigerators, engines and clocks."""

__version__ = "0.1.0"
