"""Quantum game simulation: density-matrix games, equilibria and protocol Monte Carlo."""

__version__ = "0.1.0"
