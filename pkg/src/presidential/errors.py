"""Exception types shared across the package."""


class PresidentialError(Exception):
    pass


class ParityError(PresidentialError):
    """Weights allow a zero weighted sum, so the sign is undefined."""


class DictatorError(PresidentialError):
    """The president's weight alone decides the sign."""


class RangeError(PresidentialError):
    pass


class BudgetError(PresidentialError):
    """An enumeration would exceed the configured work budget."""


class SchemeError(PresidentialError):
    pass


class DegreeError(SchemeError):
    """Arity too small for the requested rounding degree."""


class SearchExhausted(PresidentialError):
    pass


class ConditionFailed(PresidentialError):
    def __init__(self, which, worst_point, message=""):
        self.which = which
        self.worst_point = worst_point
        super().__init__(message or f"condition {which} fails near delta={worst_point}")


class InfeasibleError(PresidentialError):
    pass


class ParamError(PresidentialError, ValueError):
    """Bad generator or command parameters."""
