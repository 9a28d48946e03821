"""Termination prover for mini-Prolog programs with integer arithmetic."""

__version__ = "0.1.0"
