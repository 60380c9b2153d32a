"""Exception hierarchy shared by every module."""


class MedaxError(Exception):
    """Base class for all library errors."""


class InputError(MedaxError):
    """Malformed shape, config or family specification."""


class ShapeError(InputError):
    pass


class ConfigError(InputError):
    pass


class BadFamily(InputError):
    pass


class OutOfRegime(MedaxError):
    """A bound hypothesis does not hold for the supplied constants."""

    def __init__(self, flag: str, detail: str = ""):
        self.flag = flag
        super().__init__(f"{flag}: {detail}" if detail else flag)


class NotOnSet(MedaxError):
    pass


class NotBackProjection(MedaxError):
    pass


class NoAxis(MedaxError):
    pass


class EmptySet(MedaxError):
    pass


class NotContraction(MedaxError):
    pass


class ConstantBreach(MedaxError):
    """Sampled constant exceeds its analytic bound: a bug in the family closed forms."""


class SingularJacobian(MedaxError):
    pass
