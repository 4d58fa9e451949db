"""Reduced variational integrators for higher-order Lagrangian systems with symmetry."""
__version__ = "0.1.0"
