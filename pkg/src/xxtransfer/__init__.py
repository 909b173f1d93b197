"""Quantum-state transfer through XX spin chains with weak end couplings."""

__version__ = "0.1.0"
