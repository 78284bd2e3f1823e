"""Exception hierarchy shared by every qkdn_orr module."""

from __future__ import annotations


class QkdnError(Exception):
    """Base class for all errors raised by qkdn_orr."""


# -- crypto --


class CryptoError(QkdnError):
    pass


class LengthMismatch(CryptoError):
    pass


class BadPadding(CryptoError):
    """CBC padding did not verify: wrong key, corrupted layer or out-of-order peel."""


class MalformedCiphertext(CryptoError):
    pass


class InvalidPublicKey(CryptoError):
    pass


class KemFailure(CryptoError):
    pass


class MissingKey(CryptoError):
    pass


# -- kms --


class KmsError(QkdnError):
    status_code = 500

    @property
    def reason(self) -> str:
        return type(self).__name__


class UnsupportedSize(KmsError):
    status_code = 400


class UnknownLink(KmsError):
    status_code = 404


class UnknownKeyId(KmsError):
    status_code = 404


class Exhausted(KmsError):
    status_code = 503


class DuplicateLink(KmsError):
    status_code = 409


KMS_ERRORS: dict[str, type[KmsError]] = {
    cls.__name__: cls
    for cls in (UnsupportedSize, UnknownLink, UnknownKeyId, Exhausted, DuplicateLink)
}


# -- netsim --


class ChannelError(QkdnError):
    pass


class UnknownRecipient(ChannelError):
    pass


class Backpressure(ChannelError):
    pass


class ChannelTimeout(ChannelError):
    pass


class ChannelDown(ChannelError):
    pass


# -- protocol --


class ProtocolError(QkdnError):
    pass


class NoPath(ProtocolError):
    pass


class UnexpectedEnvelope(ProtocolError):
    pass


class TrialFailed(ProtocolError):
    """A node context failed during a trial; `cause` is the original error."""

    def __init__(self, node: str, cause: BaseException) -> None:
        super().__init__(f"node {node} failed: {type(cause).__name__}: {cause}")
        self.node = node
        self.cause = cause


# -- harness --


class HarnessError(QkdnError):
    pass


class IncompleteData(HarnessError):
    pass


class ConfigError(HarnessError):
    pass
