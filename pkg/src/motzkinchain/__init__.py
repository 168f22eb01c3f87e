"""Numerical toolkit for a colored-Motzkin-walk spin chain.

Subpackages cover walk combinatorics, exact Schmidt spectra and entropy
scaling, the frustration-free chain Hamiltonian, a Dyck-space Markov chain
with canonical-path gap certificates, Brownian-excursion area statistics with
a variational gap bound, and the boundary-free chain in a weak external
field.
"""

__version__ = "0.1.0"
