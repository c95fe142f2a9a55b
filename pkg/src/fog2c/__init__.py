"""Fog communication-and-computing cost models, allocation and AoI simulation."""
__version__ = "0.1.0"
