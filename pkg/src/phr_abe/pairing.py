"""Bilinear group abstraction over BLS12-381.

The scheme is written multiplicatively against :class:`PairingGroup`. Group
elements support ``*``, ``/``, ``**`` (integer exponents, reduced mod the
group order) and ``bytes()`` for their canonical encoding.

BLS12-381 is an asymmetric (type-3) curve, so each scheme element lives in a
fixed source group. Hashes land in G2, and the placement is chosen so every
pairing in decryption is G1 x G2:

    G1: h1, h2, C1, C_y, C_vk, D'_j
    G2: H(.), g^alpha (master), D, E, D_j, C'_y, C'_vk
    GT: e(g1, g2)^alpha, K

Two backends implement the arithmetic: the compiled ``_native`` extension
(arkworks) and a pure-Python fallback on py_ecc. The default is chosen at
import; set ``PHR_ABE_BACKEND=python`` to force the fallback.
"""

import os
import random
import secrets
from dataclasses import dataclass

CURVE_ID = "BLS12-381"
ORDER = 0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001
SCALAR_BYTES = 32
DEFAULT_HASH_CONTEXT = b"PHR-ABE-V01-CS01-with-BLS12381G2_XMD:SHA-256_SSWU_RO_"

_backends = {}


def load_backend(name):
    """Return the backend module called ``name`` ("native" or "python")."""
    if name in _backends:
        return _backends[name]
    if name == "native":
        from . import _native as mod
    elif name == "python":
        from . import _pure as mod
    else:
        raise ValueError(f"unknown backend {name!r}")
    _backends[name] = mod
    return mod


def available_backends():
    out = []
    for name in ("native", "python"):
        try:
            load_backend(name)
        except ImportError:
            continue
        out.append(name)
    return out


def _select_default():
    wanted = os.environ.get("PHR_ABE_BACKEND", "").strip().lower()
    if wanted:
        load_backend(wanted)
        return wanted
    try:
        load_backend("native")
        return "native"
    except ImportError:
        load_backend("python")
        return "python"


DEFAULT_BACKEND = _select_default()


class Element:
    """An immutable element of one of the three groups."""

    __slots__ = ("raw",)
    kind = ""
    size = 0

    def __init__(self, raw):
        self.raw = raw

    def __mul__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return type(self)(self.raw.mul(other.raw))

    def __truediv__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return type(self)(self.raw.div(other.raw))

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        return type(self)(self.raw.pow((k % ORDER).to_bytes(SCALAR_BYTES, "big")))

    def inverse(self):
        return type(self)(self.raw.inverse())

    def is_identity(self):
        return self.raw.is_identity()

    def __bytes__(self):
        return bytes(self.raw.to_bytes())

    def __eq__(self, other):
        return type(other) is type(self) and self.raw == other.raw

    def __hash__(self):
        return hash((self.kind, self.raw.__hash__()))

    def __repr__(self):
        return f"<{self.kind} {bytes(self)[:8].hex()}..>"


class G1Element(Element):
    __slots__ = ()
    kind = "G1"
    size = 48


class G2Element(Element):
    __slots__ = ()
    kind = "G2"
    size = 96


class GTElement(Element):
    __slots__ = ()
    kind = "GT"
    size = 576


@dataclass
class OpCounter:
    """Instrumentation only: counts Miller loops evaluated through a group."""

    pairings: int = 0

    def reset(self):
        self.pairings = 0


class PairingGroup:
    """Group descriptor: curve, order, generators, hash and pairing."""

    curve_id = CURVE_ID
    order = ORDER

    def __init__(self, backend=None, hash_context=DEFAULT_HASH_CONTEXT):
        self.backend = backend or DEFAULT_BACKEND
        self._mod = load_backend(self.backend)
        self.hash_context = bytes(hash_context)
        self.g1 = G1Element(self._mod.G1.generator())
        self.g2 = G2Element(self._mod.G2.generator())
        self.counter = OpCounter()
        self._gt = None

    def __repr__(self):
        return f"PairingGroup({self.curve_id}, backend={self.backend!r})"

    @property
    def gt(self):
        """e(g1, g2), computed once."""
        if self._gt is None:
            self._gt = GTElement(self._mod.pair(self.g1.raw, self.g2.raw))
        return self._gt

    def identity(self, kind):
        mod = self._mod
        return {"G1": G1Element(mod.G1.identity()), "G2": G2Element(mod.G2.identity()),
                "GT": GTElement(mod.GT.identity())}[kind]

    def pair(self, a, b):
        if not isinstance(a, G1Element) or not isinstance(b, G2Element):
            raise TypeError("pair() takes a G1 element and a G2 element")
        self.counter.pairings += 1
        return GTElement(self._mod.pair(a.raw, b.raw))

    def multi_pair(self, pairs):
        """Product of e(a_i, b_i) with a single final exponentiation."""
        pairs = list(pairs)
        for a, b in pairs:
            if not isinstance(a, G1Element) or not isinstance(b, G2Element):
                raise TypeError("multi_pair() takes (G1, G2) tuples")
        self.counter.pairings += len(pairs)
        return GTElement(self._mod.multi_pair([a.raw for a, _ in pairs], [b.raw for _, b in pairs]))

    def hash_to_group(self, label):
        """Hash a label into G2 (RFC 9380 SSWU, random-oracle variant)."""
        if isinstance(label, str):
            label = label.encode("utf-8")
        return G2Element(self._mod.G2.hash(bytes(label), self.hash_context))

    def from_bytes(self, kind, data):
        """Decode and validate an element; raises ValueError on bad input."""
        data = bytes(data)
        if kind == "G1":
            return G1Element(self._mod.G1.from_bytes(data))
        if kind == "G2":
            return G2Element(self._mod.G2.from_bytes(data))
        if kind == "GT":
            return GTElement(self._mod.GT.from_bytes(data))
        raise ValueError(f"unknown group {kind!r}")

    def random_scalar(self, rng):
        return random_scalar(rng)


def random_scalar(rng):
    """Uniform element of Z_p."""
    return rng.randrange(ORDER)


def inv(k):
    k %= ORDER
    if k == 0:
        raise ZeroDivisionError("0 has no inverse mod the group order")
    return pow(k, -1, ORDER)


def scalar_bytes(k):
    return (k % ORDER).to_bytes(SCALAR_BYTES, "big")


def scalar_from_bytes(b):
    if len(b) != SCALAR_BYTES:
        raise ValueError("scalar must be 32 bytes")
    k = int.from_bytes(b, "big")
    if k >= ORDER:
        raise ValueError("scalar out of range")
    return k


def default_rng():
    return secrets.SystemRandom()


def seeded_rng(seed):
    """Deterministic RNG for tests and benchmarks. Not for production keys."""
    return random.Random(seed)


def random_bytes(rng, n):
    return rng.getrandbits(8 * n).to_bytes(n, "big")
