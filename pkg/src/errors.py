"""
Exception hierarchy for ACE.
Library code raises these; only the CLI turns them into exit codes.
"""

from typing import Optional


class AceError(Exception):
    """Base class for every error raised by the ACE packages."""


# --- crypto-suite ---

class CryptoError(AceError):
    pass


class DomainError(CryptoError):
    """Value outside the domain of a primitive (permutation domain, group, Z*_p)."""


class ZeroResidueFault(CryptoError):
    """A chain value reduced to 0 mod p; the enclosing batch must be aborted."""


class IntegrityError(CryptoError):
    """Authenticated decryption failed (wrong key or tampered ciphertext)."""


class DAceRegenerateFault(ZeroResidueFault):
    """A D-ACE chain value b_j was 0 mod p; the instance has to be regenerated."""


# --- protocol-core ---

class ProtocolError(AceError):
    pass


class MalformedTokenError(ProtocolError):
    pass


class DuplicateLabelFault(ProtocolError):
    """ISet already holds the label (hash collision or replayed batch)."""


class ConsistencyFault(ProtocolError):
    """A delta derived a label that is not in ISet. Never happens under honest operation."""


class StalenessError(ProtocolError):
    """A W-delta was applied out of order or twice."""


class ResultIntegrityError(ProtocolError):
    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


class AuthorizationError(ProtocolError):
    pass


# --- storage-engine ---

class StorageError(AceError):
    pass


class KeyWidthError(StorageError):
    pass


class StorageIOError(StorageError):
    pass


class SnapshotChecksumError(StorageError):
    pass


# --- wire-and-cli ---

class WireFormatError(AceError):
    pass


class TruncatedMessageError(WireFormatError):
    pass


class BadMagicError(WireFormatError):
    pass


class ChecksumMismatchError(WireFormatError):
    pass


class UnknownMessageTypeError(WireFormatError):
    pass


class IngestionError(AceError):
    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigurationError(AceError):
    """Settings rejected by AceConfig validation."""
