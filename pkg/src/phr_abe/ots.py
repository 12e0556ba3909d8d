"""One-time signatures binding a ciphertext to its verification key.

Ed25519 as implemented by ``cryptography`` rejects non-canonical signatures,
which gives the strong unforgeability the binding needs.
"""

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from .pairing import random_bytes

ALGORITHM = "ed25519"
VK_BYTES = 32
SIG_BYTES = 64


def keygen(rng):
    """Return (signing key, 32-byte verification key)."""
    sk = Ed25519PrivateKey.from_private_bytes(random_bytes(rng, 32))
    return sk, sk.public_key().public_bytes_raw()


def sign(sk, msg):
    return sk.sign(bytes(msg))


def verify(vk, msg, sig):
    if len(vk) != VK_BYTES:
        raise ValueError("malformed verification key")
    if len(sig) != SIG_BYTES:
        return False
    try:
        Ed25519PublicKey.from_public_bytes(bytes(vk)).verify(bytes(sig), bytes(msg))
    except InvalidSignature:
        return False
    return True
