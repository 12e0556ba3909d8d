"""Exception types. Decryption failures are split by cause."""


class PHRError(Exception):
    pass


class MalformedError(PHRError, ValueError):
    """Bytes that do not decode to a well-formed object."""


class PolicySyntaxError(PHRError, ValueError):
    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class DecryptionError(PHRError):
    """Base for every way decryption can return bottom."""


class SignatureInvalidError(DecryptionError):
    pass


class MalformedRecordError(SignatureInvalidError, MalformedError):
    """A record that cannot be parsed; its signature cannot be checked."""


class KeyExpiredError(DecryptionError):
    pass


class PolicyUnsatisfiedError(DecryptionError):
    pass


class EnvelopeAuthError(DecryptionError):
    pass


class UnauthorizedRequest(PHRError):
    pass
