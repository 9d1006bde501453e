"""Exact S-Helly number engine."""

__version__ = "0.1.0"
