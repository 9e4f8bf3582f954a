"""Exception types shared across the package."""


class HurwitzCountError(Exception):
    """Base class for all package errors."""


class NonCoprimeOrder(HurwitzCountError):
    """q is not coprime to the group order."""


class BudgetExceeded(HurwitzCountError):
    """A computation would exceed the configured state/size budget."""

    def __init__(self, message, attempted=None, budget=None):
        super().__init__(message)
        self.attempted = attempted
        self.budget = budget


class NotGenerating(HurwitzCountError):
    """The chosen conjugation-invariant subset does not generate the group."""


class NotNormal(HurwitzCountError):
    """Subgroup is not normal where normality is required."""


class QuotientNotAbelian(HurwitzCountError):
    """A quotient that must be abelian is not."""


class NonInvariantInput(HurwitzCountError):
    """Multidegree or boundary element is not Frobenius-invariant."""


class ClassOutsideC(HurwitzCountError):
    """A conjugacy class outside the configured ramification support was used."""


class NonAlgebraicResidue(HurwitzCountError):
    """A Brauer element without algebraic residue entered an Euler factor."""


class NotInSubset(HurwitzCountError):
    """Brauer element lies outside the subset where the product converges."""


class UnbalancedInput(HurwitzCountError):
    """The minimal classes do not generate the group; use the unbalanced route."""


class LatticeViolation(HurwitzCountError):
    """Subgroup lattice preconditions for the unbalanced count are violated."""


class InvalidKummer(HurwitzCountError):
    """Kummer enumeration requested with ell not dividing q - 1."""


class IndexOutOfRange(HurwitzCountError):
    """Braid move index outside 1..n-1."""
