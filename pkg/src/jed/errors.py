"""Exception types raised across the package."""


class ImageDecodeError(ValueError):
    """Encoded image bytes could not be parsed."""


class UnsupportedFormatError(ImageDecodeError):
    """Well-formed file in a bit depth or colorspace we do not handle."""


class ParameterError(ValueError):
    pass


class ShapeError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


class NumericalError(ArithmeticError):
    pass
