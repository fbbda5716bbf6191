"""Exactly solvable time-dependent oscillators from fourth Painleve transcendents.

Layers, bottom up: special functions and exact polynomials (specfun), the
Ermakov auxiliary equation (ermakov), Painleve IV solution hierarchies
(painleve4), the quantum invariant with its ladder operators and zero modes
(invariant), potentials and Schrodinger solutions (hamiltonian), and a
Crank-Nicolson cross-check (tdse).
"""
__version__ = "0.1.0"

from .errors import ConstraintError, NumericalError  # noqa: E402

__all__ = ["ConstraintError", "NumericalError", "__version__"]
