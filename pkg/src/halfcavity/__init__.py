"""Pressurized cavity in an elastic half-space: Neumann-function BEM, inversion and stability sweeps."""

__version__ = "0.1.0"
