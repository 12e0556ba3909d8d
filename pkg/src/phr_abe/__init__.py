"""Fog-assisted personal health record sharing over CP-ABE."""

from .cpabe import (
    AttributeKey,
    MasterKey,
    PublicParams,
    SealedRecord,
    decrypt,
    decrypt_node,
    encrypt,
    keygen,
    setup,
    size_report,
)
from .errors import (
    DecryptionError,
    EnvelopeAuthError,
    KeyExpiredError,
    MalformedError,
    MalformedRecordError,
    PolicySyntaxError,
    PolicyUnsatisfiedError,
    SignatureInvalidError,
)
from .pairing import DEFAULT_BACKEND, PairingGroup, seeded_rng
from .policy import Gate, Leaf, parse_policy, satisfies, to_text
from .timeval import ValiditySet

__version__ = "0.1.0"
