"""Toolkit for propositional computability logic with sequential operators."""

__version__ = "0.1.0"
