"""Simulation and stochastic geometry of isotropic spin-weighted Gaussian fields on the sphere."""
__version__ = "0.1.0"
