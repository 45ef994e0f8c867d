"""Exception types shared across the package."""


class HoifitError(Exception):
    """Base class for all package errors."""


class NonPositiveDepth(HoifitError):
    """A point or mesh lies at or behind the camera plane (z <= 0)."""


class EmptySet(HoifitError):
    """An operation received an empty point set."""


class DegenerateConfiguration(HoifitError):
    """Point sets too small or collinear for a unique alignment."""


class FullyBehindCamera(HoifitError):
    """No mesh vertex lies in front of the camera."""


class DimensionMismatch(HoifitError):
    """Masks or grids with incompatible shapes."""


class PartIndexOutOfRange(HoifitError):
    """Body part index outside 1..14."""


class CorrespondenceMismatch(HoifitError):
    """Mesh vertex count does not match the body model it should correspond to."""


class MalformedGrid(HoifitError):
    """Field grid file failed to parse."""


class EmptyShell(HoifitError):
    """No probe point fell inside the near-surface shell."""


class SingularMatrix(HoifitError):
    """Nearest rotation is not unique (two vanishing singular values)."""


class NonPositiveMeanDepth(HoifitError):
    """Mesh mean depth is not positive; depth-aware scaling undefined."""


class TopologyMismatch(HoifitError):
    """Vertex-to-vertex metric requested for meshes with different topology."""


class MaskMissing(HoifitError):
    """A required mask file is absent from the scene."""


class SceneValidationError(HoifitError):
    """Scene directory is incomplete or inconsistent."""


class RigFormatError(HoifitError):
    """Body rig file failed validation."""
