"""Exception types shared across the package."""


class WicklabError(Exception):
    """Base class for all errors raised by this package."""


class SizeOverflow(WicklabError):
    """A requested basis, tensor space, or permanent exceeds the hard size cap."""


class DimMismatch(WicklabError):
    """Vector or matrix dimensions do not match the space they are used on."""


class BasisMismatch(WicklabError):
    """Operators or vectors built over different Fock bases were combined."""


class GridMismatch(WicklabError):
    """Objects built over different spectral grids were combined."""


class MisalignedCut(WicklabError):
    """A frequency cut does not coincide with a bin edge of the grid."""


class EmptyGrid(WicklabError):
    """A grid with no bins was requested where at least one bin is required."""


class TruncationTooSmall(WicklabError):
    """The particle-number truncation cannot hold the requested construction."""


class AdaptednessViolation(WicklabError):
    """A step-process piece fails the adaptedness test at its left endpoint."""


class RefinementMismatch(WicklabError):
    """Integrands over incompatible partitions were combined."""


class ConfigInvalid(WicklabError):
    """A suite configuration failed validation."""


class DegenerateInput(WicklabError):
    """A numerical fit was asked for on data that cannot support it."""
