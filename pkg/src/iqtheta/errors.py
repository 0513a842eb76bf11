"""Exception taxonomy shared across the package.

The CLI maps these onto its exit codes; library users catch them directly.
"""


class FieldMismatchError(ValueError):
    """Two operands live over different imaginary quadratic fields."""


class SingularMatrixError(ValueError):
    """A matrix that must be invertible is not."""


class DomainError(ValueError):
    """An evaluation point lies outside its required domain."""


class TruncationError(RuntimeError):
    """The truncation radius needed for the requested accuracy exceeds the cap."""


class GroupCapError(RuntimeError):
    """A finite quotient group exceeds the configured order cap."""


class SublatticeError(ValueError):
    """Attempted quotient by a lattice that is not a finite-index sublattice."""
