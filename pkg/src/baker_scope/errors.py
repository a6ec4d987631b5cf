"""Exception hierarchy shared by every module."""


class BakerScopeError(Exception):
    """Base class for all package errors."""


class InsufficientPrecision(BakerScopeError, ArithmeticError):
    """An angle does not carry enough bits for the requested reduction."""


class RangeError(BakerScopeError, ArithmeticError):
    def __init__(self, message, log_modulus=None):
        super().__init__(message)
        self.log_modulus = log_modulus


class RangeOverflow(RangeError):
    pass


class RangeUnderflow(RangeError):
    pass


class DomainError(BakerScopeError, ValueError):
    pass


class RadiiInvalid(BakerScopeError, ValueError):
    pass


class ExponentBudgetExceeded(BakerScopeError, ValueError):
    def __init__(self, k, bits, budget):
        super().__init__(f"exponent n_{k} needs {bits} bits, budget is {budget}")
        self.k = k
        self.bits = bits
        self.budget = budget


class BudgetExceeded(BakerScopeError, ValueError):
    pass


class IndexOutOfRange(BakerScopeError, IndexError):
    pass


class IndexTooSmall(BakerScopeError, ValueError):
    pass


class InvalidSampleCount(BakerScopeError, ValueError):
    pass


class PoleHit(BakerScopeError, ArithmeticError):
    def __init__(self, message, k=None, nu=None):
        super().__init__(message)
        self.k = k
        self.nu = nu


class ToleranceUnachievable(BakerScopeError, ArithmeticError):
    pass


class OutsideDomain(BakerScopeError, ValueError):
    pass


class DegenerateNormalizer(BakerScopeError, ValueError):
    pass


class ConfigInvalid(BakerScopeError, ValueError):
    def __init__(self, errors):
        if isinstance(errors, str):
            errors = {"config": errors}
        self.errors = dict(errors)
        detail = "; ".join(f"{k}: {v}" for k, v in self.errors.items())
        super().__init__(f"invalid configuration ({detail})")


class WindowOutOfRange(BakerScopeError, ValueError):
    pass


class IoFailure(BakerScopeError, OSError):
    pass
