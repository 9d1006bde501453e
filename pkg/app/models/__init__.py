"""Pydantic models package."""
