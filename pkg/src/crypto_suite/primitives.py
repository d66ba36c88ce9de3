"""
Keyed primitives and scalar arithmetic used by the protocol roles.
F = AES-128-CMAC, F_p = HMAC-SHA-512 reduced mod p, H = HMAC-SHA-256 over an encoded
group element, SE = AES-128-GCM with a random 96-bit nonce (nonce || ct || tag).
"""

from Crypto.Cipher import AES
from Crypto.Hash import CMAC, HMAC, SHA256, SHA512

from src.config import NONCE_WIDTH, TAG_WIDTH
from src.errors import DomainError, IntegrityError, ZeroResidueFault
from .group import GroupElement, GroupParams
from .instrumentation import record
from .models import CipherKey, HashKey, PermDomainValue, PrfKey, Scalar, ScalarPrfKey
from .randomness import RandomSource


def prf_bytes(key: PrfKey, data: bytes) -> bytes:
    if not data:
        raise DomainError("PRF input must be nonempty")
    record("prf_calls")
    return CMAC.new(key.material, msg=data, ciphermod=AES).digest()


def prf_scalar(key: ScalarPrfKey, data: bytes, group: GroupParams) -> Scalar:
    if not data:
        raise DomainError("PRF input must be nonempty")
    record("scalar_prf_calls")
    counter = 0
    while True:
        digest = HMAC.new(key.material, counter.to_bytes(4, "big") + data, digestmod=SHA512).digest()
        value = int.from_bytes(digest, "big") % group.order
        if value:
            return Scalar(value, group.order)
        counter += 1


def keyed_hash(key: HashKey, element: GroupElement) -> bytes:
    record("hashes")
    return HMAC.new(key.material, element.encode(), digestmod=SHA256).digest()


def group_exp(base: GroupElement, exponent: Scalar) -> GroupElement:
    if exponent.order != base.group.order:
        raise DomainError("exponent is not a scalar of this group")
    record("group_exps")
    return base.group.exp(base, exponent.value)


def scalar_mul(a: Scalar, b: Scalar) -> Scalar:
    if a.order != b.order:
        raise DomainError("scalars of different groups")
    return Scalar(a.value * b.value % a.order, a.order)


def scalar_inv(a: Scalar) -> Scalar:
    return Scalar(pow(a.value, -1, a.order), a.order)


def reduce_to_scalar(x: PermDomainValue, group: GroupParams) -> Scalar:
    """ST' = ST mod p; a zero residue is a fault the caller must abort on."""
    residue = x.value % group.order
    if residue == 0:
        raise ZeroResidueFault("chain value is 0 mod the group order")
    return Scalar(residue, group.order)


def se_encrypt(key: CipherKey, plaintext: bytes, rng: RandomSource) -> bytes:
    record("encryptions")
    nonce = rng.read(NONCE_WIDTH)
    cipher = AES.new(key.material, AES.MODE_GCM, nonce=nonce, mac_len=TAG_WIDTH)
    ciphertext, tag = cipher.encrypt_and_digest(plaintext)
    return nonce + ciphertext + tag


def se_decrypt(key: CipherKey, blob: bytes) -> bytes:
    record("decryptions")
    if len(blob) < NONCE_WIDTH + TAG_WIDTH:
        raise IntegrityError("ciphertext shorter than nonce and tag")
    nonce, body, tag = blob[:NONCE_WIDTH], blob[NONCE_WIDTH:-TAG_WIDTH], blob[-TAG_WIDTH:]
    cipher = AES.new(key.material, AES.MODE_GCM, nonce=nonce, mac_len=TAG_WIDTH)
    try:
        return cipher.decrypt_and_verify(body, tag)
    except ValueError as exc:
        raise IntegrityError("authentication tag mismatch") from exc


def ciphertext_width(plaintext_len: int) -> int:
    return NONCE_WIDTH + plaintext_len + TAG_WIDTH
