"""Exception types raised across the package."""


class PhotonPovmError(Exception):
    """Base class for all package errors."""


class NotHermitian(PhotonPovmError, ValueError):
    pass


class NotPsd(PhotonPovmError, ValueError):
    pass


class NotUnitary(PhotonPovmError, ValueError):
    pass


class DimensionMismatch(PhotonPovmError, ValueError):
    pass


class ZeroVector(PhotonPovmError, ValueError):
    pass


class ZeroBranch(PhotonPovmError, ValueError):
    """The requested teleportation branch has (numerically) zero probability."""


class UnsupportedSettings(PhotonPovmError, ValueError):
    pass


class NotEffect(PhotonPovmError, ValueError):
    """Operator is not a valid POVM effect (spectrum outside [0, 1])."""


class InvalidPovm(PhotonPovmError, ValueError):
    pass


class InvalidDensity(PhotonPovmError, ValueError):
    pass


class DocumentError(PhotonPovmError, ValueError):
    """A JSON document could not be parsed into the expected structure."""


class InvalidConfig(PhotonPovmError, ValueError):
    pass
