"""
Error Types

Exception hierarchy shared by every devsurf module. All errors derive from
DevsurfError, itself a ValueError, so callers that only know about bad input
values keep working.
"""

from typing import Optional


class DevsurfError(ValueError):
    """Base class for all devsurf errors"""


class ExpressionError(DevsurfError):
    """Base class for expression parsing and evaluation errors"""


class ExpressionSyntaxError(ExpressionError):
    """Malformed expression text; offset is the byte offset of the problem"""

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class UnknownFunctionError(ExpressionSyntaxError):
    """Call of a function the grammar does not provide"""


class UnknownVariableError(ExpressionSyntaxError):
    """Identifier outside the declared variable list"""


class UnboundVariableError(ExpressionError):
    """Evaluation without a binding for a free variable"""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Unbound variable '{name}'")


class ExpressionDomainError(ExpressionError):
    """Argument outside the domain of a function (sqrt, log, division, power)"""


class SpecError(DevsurfError):
    """Invalid spec document; key names the offending field"""

    def __init__(self, message: str, key: Optional[str] = None):
        self.key = key
        prefix = f"key '{key}': " if key else ""
        super().__init__(f"{prefix}{message}")


class SampleError(DevsurfError):
    """Error tied to one sample of a discretised curve or profile"""

    def __init__(self, message: str, index: Optional[int] = None):
        self.index = index
        suffix = f" (sample {index})" if index is not None else ""
        super().__init__(f"{message}{suffix}")


class RegularityError(SampleError):
    """Vanishing curve differential"""


class SingularityError(SampleError):
    """sin(zeta) or sin(theta) below the singular tolerance"""


class ParameterRangeError(DevsurfError):
    """Parameter value outside the sampled range"""


class DegenerateError(DevsurfError):
    """Quantity is indeterminate for the given input (e.g. 0/0)"""


class GridMismatchError(DevsurfError):
    """Inputs sampled on incompatible grids"""


class DevelopabilityError(DevsurfError):
    """Profile quad violates dS*dP = dQ*dR"""

    def __init__(self, message: str, parameter: Optional[float] = None):
        self.parameter = parameter
        super().__init__(message)


class GeomIOError(DevsurfError):
    """Invalid document handed to an exporter or parser"""
