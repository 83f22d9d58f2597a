"""Exception hierarchy.

``ConfigError`` covers misuse of the API / CLI (bad parameters, unknown
keys, empty feature lists); ``DataError`` and its subclasses cover invalid
data at an ingestion or computation boundary. The CLI maps the former to
exit code 1 and the latter to exit code 2.
"""


class AntClustError(Exception):
    """Base class for all package errors."""


class ConfigError(AntClustError):
    """Invalid configuration: bad parameter values, unknown keys, empty inputs."""


class DataError(AntClustError, ValueError):
    """Invalid data supplied to an operation or read from a file."""


class FeatureRangeError(DataError):
    """Scalar feature value outside the normalized [0, 1] domain."""


class SimilarityRangeError(DataError):
    """Similarity value outside [0, 1]."""


class DescriptorMismatchError(DataError):
    """Descriptor sets with incompatible widths."""


class DescriptorFormatError(DataError):
    """Malformed descriptor container (bad magic, truncation, zero counts)."""


class MatrixError(DataError):
    """Similarity-matrix problem, locating the offending cell when known."""

    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        if row is not None:
            where = f"row {row}" if col is None else f"row {row}, column {col}"
            message = f"{message} ({where})"
        super().__init__(message)
        self.row = row
        self.col = col


class MatrixParseError(MatrixError):
    """Matrix file is not parseable as numbers."""


class MatrixShapeError(MatrixError):
    """Matrix file does not describe an n-by-n matrix."""


class MatrixRangeError(MatrixError):
    """Matrix entry outside [0, 1] or diagonal entry not 1."""


class MatrixSymmetryError(MatrixError):
    """Matrix asymmetric beyond tolerance."""
