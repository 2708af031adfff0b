"""Substructuring preconditioners for 3D elasticity and Maxwell systems."""
__version__ = "0.1.0"
