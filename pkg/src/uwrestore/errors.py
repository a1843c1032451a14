"""Exception types shared across the package.

Everything derives from :class:`Error`, itself a ``ValueError``, so callers
that do not care about the distinction can catch a single class.
"""


class Error(ValueError):
    """Base class for errors raised by this package."""


class DomainError(Error):
    """A parameter is outside its physical or mathematical domain."""


class DegenerateIntervalError(DomainError):
    """An interval (depth, wavelength, ...) has zero or negative length."""


class CoverageError(DomainError):
    """Samples do not cover the requested interval."""


class ZeroResponseError(DomainError):
    """A sensor response integrates to zero, so it cannot weight a mean."""


class ExtrapolationError(DomainError):
    """A resampling grid extends outside the support of the curve."""


class InvalidProfileError(Error):
    """A sampled curve or depth profile violates its ordering invariants."""


class ShapeError(Error):
    """Array dimensions do not match what the operation requires."""


class ChannelError(ShapeError):
    """An image does not carry the expected three RGB channels."""


class SizeError(ShapeError):
    """An image is too small for the requested window."""


class DegenerateVectorError(Error):
    """A zero-norm vector was passed where cosine similarity is needed."""


class InsufficientSamplesError(Error):
    """Too few samples to perform the computation."""


class NonPSDError(Error):
    """A covariance matrix is not positive semidefinite within tolerance."""


class FeatureFormatError(Error):
    """A feature or feature-stack file is malformed."""


class ImageDecodeError(Error):
    """An image file could not be read or decoded."""


class ImageFormatError(Error):
    """An image file has an unsupported bit depth or channel layout."""


class ManifestError(Error):
    """Base class for dataset manifest problems."""


class ManifestParseError(ManifestError):
    """The manifest file is not well formed."""


class ManifestValidationError(ManifestError):
    """The manifest parsed but violates a consistency rule."""


class SplitError(ManifestError):
    """A train/test split cannot be built from the manifest."""
