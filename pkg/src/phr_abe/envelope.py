"""Symmetric envelope for the record payload.

The ABE layer only transports a GT element K. The payload itself is sealed
with AES-256-GCM under a key derived from K's canonical encoding.

Layout: algorithm id (1 byte), then length-prefixed nonce and
length-prefixed ciphertext||tag.
"""

from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from .encoding import Reader, Writer
from .errors import EnvelopeAuthError, MalformedError
from .pairing import random_bytes

AES256_GCM = 1
KEY_BYTES = 32
NONCE_BYTES = 12
DEFAULT_MAX_PAYLOAD = 64 * 1024 * 1024
_KDF_INFO = b"phr-abe/v1/envelope-key"


class MalformedEnvelopeError(MalformedError):
    pass


@dataclass(frozen=True)
class EnvelopePayload:
    nonce: bytes
    ciphertext: bytes
    algorithm: int = AES256_GCM

    def to_bytes(self):
        return Writer().u8(self.algorithm).blob(self.nonce).blob(self.ciphertext).getvalue()

    @classmethod
    def from_bytes(cls, data):
        r = Reader(data, "envelope")
        try:
            alg = r.u8()
            nonce = r.blob()
            ct = r.blob()
            r.done()
        except MalformedError as exc:
            raise MalformedEnvelopeError(str(exc)) from None
        if alg != AES256_GCM:
            raise MalformedEnvelopeError(f"unknown envelope algorithm {alg}")
        if len(nonce) != NONCE_BYTES or len(ct) < 16:
            raise MalformedEnvelopeError("bad envelope field sizes")
        return cls(nonce, ct, alg)


def derive_key(k):
    """Fixed-width symmetric key from a GT element (HKDF-SHA256)."""
    return HKDF(algorithm=hashes.SHA256(), length=KEY_BYTES, salt=None, info=_KDF_INFO).derive(
        bytes(k)
    )


def seal(key, plaintext, rng, max_size=DEFAULT_MAX_PAYLOAD):
    plaintext = bytes(plaintext)
    if len(plaintext) > max_size:
        raise ValueError(f"payload of {len(plaintext)} bytes exceeds cap of {max_size}")
    nonce = random_bytes(rng, NONCE_BYTES)
    ct = AESGCM(key).encrypt(nonce, plaintext, bytes([AES256_GCM]))
    return EnvelopePayload(nonce, ct)


def open_envelope(key, envelope):
    """Decrypt an envelope (object or bytes). Raises EnvelopeAuthError on tamper."""
    if not isinstance(envelope, EnvelopePayload):
        envelope = EnvelopePayload.from_bytes(envelope)
    try:
        return AESGCM(key).decrypt(envelope.nonce, envelope.ciphertext, bytes([envelope.algorithm]))
    except InvalidTag:
        raise EnvelopeAuthError("envelope authentication failed") from None
