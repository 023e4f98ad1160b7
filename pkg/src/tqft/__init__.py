"""Qubit representations of 1+1D thermal field theories.

Subpackages build lattice Hamiltonians for free and background-coupled
Majorana fermions and for a digitized scalar field, prepare Gibbs states
exactly or through imaginary-time evolution, and compare measured mode
occupations against Fermi-Dirac / Bose-Einstein references.
"""

__version__ = "0.1.0"
