"""Exact numbers and polyhedral geometry."""
