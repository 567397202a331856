"""Exception hierarchy shared by all homoglab modules."""


class HomoglabError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(HomoglabError):
    """Invalid user-supplied configuration (eps not 1/n, bad rectangle, ...)."""


class GeometryError(HomoglabError):
    """Geometric precondition violated (hole touches the cell boundary, ...)."""


class MeshInternalError(HomoglabError):
    """Mesh generation produced an inconsistent triangulation."""


class AssemblyError(HomoglabError):
    """Finite-element assembly failed (degenerate triangle, size mismatch)."""


class ConstraintError(HomoglabError):
    """Conflicting or degenerate constraint specification."""


class SolverError(HomoglabError):
    """Linear or eigenvalue solver failed or did not converge."""


class OutsideDomainError(HomoglabError):
    """A point query landed outside the fluid region."""


class AlignmentError(HomoglabError):
    """Eigenspace alignment failed (rank-deficient cross Gram matrix)."""
