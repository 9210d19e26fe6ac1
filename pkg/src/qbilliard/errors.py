class SizeCapError(ValueError):
    """A dense object would exceed the supported size."""


class PostselectionError(ArithmeticError):
    """The postselected output has zero norm, so the input is forbidden."""
