"""Symbolic verification and code generation for finite volume solvers."""

__version__ = "0.1.0"
