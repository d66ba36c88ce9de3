"""
Configuration for ACE.
Module-level constants for the fixed formats plus the pydantic AceConfig model
that the CLI builds from flags and persists next to the role states.
"""

from typing import Literal, Optional
from pydantic import BaseModel, Field, ValidationError, field_validator

from src.errors import ConfigurationError

# Wire framing
WIRE_MAGIC = b"ACE1"
CHECKSUM_WIDTH = 32

# Snapshot framing
SNAPSHOT_MAGIC = b"ACEDB"
SNAPSHOT_VERSION = 1

# Primitive output widths (bytes)
PRF_WIDTH = 16          # AES-128-CMAC
HASH_WIDTH = 32         # HMAC-SHA-256 label
SCALAR_WIDTH = 32
PRF_KEY_WIDTH = 16
SCALAR_PRF_KEY_WIDTH = 32
HASH_KEY_WIDTH = 32
CIPHER_KEY_WIDTH = 16
NONCE_WIDTH = 12
TAG_WIDTH = 16

MAX_KEYWORD_BYTES = 0xFFFF    # u16 length prefix in the W-delta encoding

DEFAULT_PERM_BITS = 2048
MIN_SECURITY_BITS = 128

CONFIG_FILENAME = "config.json"


class AceConfig(BaseModel):
    """Settings shared by the three role states of one deployment."""
    security_bits: int = Field(default=128, description="Security parameter lambda")
    group: Literal["ed25519", "modp-toy"] = Field(default="ed25519")
    perm_modulus_bits: int = Field(default=DEFAULT_PERM_BITS)
    storage_backend: Literal["memory", "sqlite"] = Field(default="sqlite")
    seed: Optional[int] = None
    record_transcript: bool = True

    @field_validator("security_bits")
    @classmethod
    def _check_security(cls, value: int) -> int:
        if value < MIN_SECURITY_BITS:
            raise ValueError(f"security must be at least {MIN_SECURITY_BITS} bits")
        return value

    @field_validator("perm_modulus_bits")
    @classmethod
    def _check_modulus(cls, value: int) -> int:
        if value < 1024 or value % 8:
            raise ValueError("permutation modulus must be a multiple of 8 and at least 1024 bits")
        return value


def load_config(text: Optional[str] = None, **fields) -> AceConfig:
    """Validate settings from JSON text or keyword fields; failures raise ConfigurationError."""
    try:
        if text is not None:
            return AceConfig.model_validate_json(text)
        return AceConfig(**fields)
    except ValidationError as exc:
        problem = exc.errors()[0]
        where = ".".join(str(part) for part in problem["loc"]) or "config"
        raise ConfigurationError(f"invalid {where}: {problem['msg']}") from exc
