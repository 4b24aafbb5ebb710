"""Particle simulation and PDE verification suite for a generalized contact
process with sterile insects, stirring and slow boundary reservoirs."""

__version__ = "0.1.0"
