"""Exception hierarchy shared by every module."""


class KurepaError(Exception):
    pass


class NotInStructure(KurepaError, KeyError):
    pass


class MissingComponent(KurepaError):
    pass


class PreconditionFailed(KurepaError):
    pass


class InconsistentCarriers(KurepaError):
    pass


class BadBudget(KurepaError, ValueError):
    pass


class BadSize(KurepaError, ValueError):
    pass


class NotUncountableSurrogate(KurepaError):
    """Amalgamation requested over a short L, where it is not guaranteed."""


class LabelConflict(KurepaError):
    """Two branches share a label but sit over different chains."""


class WidthExceeded(KurepaError):
    def __init__(self, message: str, request=None):
        super().__init__(message)
        self.request = request


class TooLarge(KurepaError, ValueError):
    pass


class NotAFilter(KurepaError, ValueError):
    pass


class ParseError(KurepaError):
    def __init__(self, path: str, line: int, token: str, reason: str):
        super().__init__(f"{path}:{line}: {reason} (at {token!r})")
        self.path = path
        self.line = line
        self.token = token
        self.reason = reason
