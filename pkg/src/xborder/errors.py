"""Exception hierarchy shared by every xborder module."""


class XBorderError(Exception):
    """Base class for all library errors."""


class UnknownJurisdiction(XBorderError, KeyError):
    def __init__(self, code):
        super().__init__(code)
        self.code = code

    def __str__(self):
        return f"unknown jurisdiction code: {self.code!r}"


class DeniedTransfer(XBorderError):
    pass


class NoCompliantRoute(XBorderError):
    pass


class WrongKeyPurpose(XBorderError):
    pass


class AuthFailure(XBorderError):
    """Authenticated decryption rejected the ciphertext."""


class NotCompellable(XBorderError):
    pass


class IndexOutOfRange(XBorderError, IndexError):
    pass


class BudgetExhausted(XBorderError):
    pass


class InvalidParameter(XBorderError, ValueError):
    pass


class EmptyEvalSet(XBorderError, ValueError):
    pass


class InsufficientTrials(XBorderError, ValueError):
    pass


class ConfigError(XBorderError, ValueError):
    pass
