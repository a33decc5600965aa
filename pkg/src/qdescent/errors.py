"""Exception types shared across the package."""


class CapacityError(Exception):
    """A desk-scale size guard was exceeded (dense tensor or qubit count)."""


class DegenerateStepError(Exception):
    """The descent step annihilated the iterate: ``x - eta*D*x`` has zero norm."""


class PostselectionError(Exception):
    """Post-selection failed: the requested outcome has (near-)zero probability,
    or sampling never observed it within the shot budget."""


class PurificationError(Exception):
    """The dominant eigenvector is ambiguous (degenerate top eigenvalue)."""
