"""Rigid body in a planar perfect fluid: boundary integrals, ODEs and limits."""

__version__ = "0.1.0"
