"""Quantum propagators of linear systems built from phase-space geometry."""
__version__ = "0.1.0"
