"""Rateless Kite codes, RS-Kite concatenation and their analysis tools."""

__version__ = "0.1.0"
