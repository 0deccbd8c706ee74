"""Exception hierarchy.

``ModelError`` marks a failure of the physics (a singular model, an
undefined linewidth, a failed integral). Bad user input that never reaches
a model raises plain ``ValueError``.
"""


class ModelError(ValueError):
    """A model cannot be evaluated at the requested parameters."""


class SingularModelError(ModelError):
    pass


class LinewidthUndefinedError(ModelError):
    pass


class UndefinedQError(ModelError):
    pass


class IntegrationError(ModelError):
    pass


class InvalidFractionError(ValueError):
    pass


class EnumerationRefusedError(ValueError):
    pass
