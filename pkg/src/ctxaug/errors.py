"""Domain error types shared across the toolkit."""


class CtxaugError(Exception):
    """Base class for all domain errors."""


# -- imaging ---------------------------------------------------------------

class MalformedStream(CtxaugError):
    """Byte stream is not a decodable PNG."""


class WrongColorType(CtxaugError):
    """PNG decoded to an unexpected color layout."""


class EmptyRegion(CtxaugError):
    """A mask selected no pixels where at least one was required."""


# -- inpaint ---------------------------------------------------------------

class NoValidSource(CtxaugError):
    """Hole leaves no fully hole-free source patch anywhere in the image."""


# -- compose ---------------------------------------------------------------

class DimensionMismatch(CtxaugError):
    """Images/masks that must share dimensions do not."""


class EmptyMask(CtxaugError):
    """Mask has no foreground pixels."""


class FullMask(CtxaugError):
    """Mask covers the whole image."""


class MissingCategory(CtxaugError):
    """A foreground category has no matching backgrounds."""


# -- augment ---------------------------------------------------------------

class OffsetOutOfRange(CtxaugError):
    """Translation offset outside the legal range for its mode."""


class AngleOutOfRange(CtxaugError):
    """Rotation angle outside the legal range for its mode."""


class ParamOutOfRange(CtxaugError):
    """Photometric parameter outside its legal range."""


# -- dataset ---------------------------------------------------------------

class SizeMismatch(CtxaugError):
    """Binary dataset file size does not match the record layout."""


class LabelOutOfRange(CtxaugError):
    """Class label outside the valid id range."""


class InsufficientClassCount(CtxaugError):
    """A class has fewer examples than the requested subset size."""


class CountMismatch(CtxaugError):
    """Foreground/background counts violate the scheduler's precondition."""


class MalformedRecord(CtxaugError):
    """Manifest line does not parse."""


class DuplicateOutputId(CtxaugError):
    """Two manifest entries share an output id."""


# -- convnet ---------------------------------------------------------------

class ShapeMismatch(CtxaugError):
    """Tensor shapes incompatible with the requested operation."""


class EmptyDataset(CtxaugError):
    """Training or evaluation set contains no examples."""


# -- annotate --------------------------------------------------------------

class StoreUnavailable(CtxaugError):
    """Annotation store directory missing or unreadable."""


class UnknownId(CtxaugError):
    """Image id not present in the annotation store."""


class BadScale(CtxaugError):
    """Requested display scale outside 1..8."""


class TimestampRegression(CtxaugError):
    """Click batch timestamp earlier than the last stored one."""


class NothingToExport(CtxaugError):
    """No completed annotations to export."""
