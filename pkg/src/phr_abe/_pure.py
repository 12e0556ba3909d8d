"""Pure-Python BLS12-381 backend built on py_ecc.

Mirrors the method surface of the compiled ``_native`` module so the two are
interchangeable. It is roughly two orders of magnitude slower and exists so
the package still works where the Rust extension could not be built.

Pairing normalisation: py_ecc evaluates the Miller loop over |x| and applies
the textbook final exponentiation, while the compiled backend returns the
cube of the signed-loop pairing. The two differ by the fixed exponent -3, so
results here are raised to -3 to keep GT encodings identical across backends.
"""

import hashlib

from py_ecc import optimized_bls12_381 as _c
from py_ecc.bls.hash_to_curve import hash_to_G2
from py_ecc.bls.point_compression import (
    compress_G1,
    compress_G2,
    decompress_G1,
    decompress_G2,
)
from py_ecc.optimized_bls12_381.optimized_pairing import final_exponentiate, miller_loop

_P = _c.field_modulus
_R = _c.curve_order
_FQ12 = _c.FQ12


def _scalar(k):
    return int.from_bytes(k, "big") % _R


def _in_subgroup(pt):
    return _c.is_inf(_c.multiply(pt, _R))


class G1:
    __slots__ = ("p",)

    def __init__(self, p):
        self.p = p

    @staticmethod
    def generator():
        return G1(_c.G1)

    @staticmethod
    def identity():
        return G1(_c.Z1)

    @staticmethod
    def from_bytes(b):
        if len(b) != 48:
            raise ValueError("invalid G1 encoding")
        try:
            pt = decompress_G1(int.from_bytes(b, "big"))
        except (ValueError, AssertionError):
            raise ValueError("invalid G1 encoding") from None
        if not _in_subgroup(pt):
            raise ValueError("invalid G1 encoding")
        out = G1(pt)
        if out.to_bytes() != bytes(b):
            raise ValueError("invalid G1 encoding")
        return out

    def to_bytes(self):
        return compress_G1(self.p).to_bytes(48, "big")

    def is_identity(self):
        return _c.is_inf(self.p)

    def mul(self, other):
        return G1(_c.add(self.p, other.p))

    def div(self, other):
        return G1(_c.add(self.p, _c.neg(other.p)))

    def inverse(self):
        return G1(_c.neg(self.p))

    def pow(self, k):
        return G1(_c.multiply(self.p, _scalar(k)))

    def __eq__(self, other):
        return isinstance(other, G1) and _c.eq(self.p, other.p)

    def __hash__(self):
        return hash(self.to_bytes())


class G2:
    __slots__ = ("p",)

    def __init__(self, p):
        self.p = p

    @staticmethod
    def generator():
        return G2(_c.G2)

    @staticmethod
    def identity():
        return G2(_c.Z2)

    @staticmethod
    def from_bytes(b):
        if len(b) != 96:
            raise ValueError("invalid G2 encoding")
        try:
            pt = decompress_G2((int.from_bytes(b[:48], "big"), int.from_bytes(b[48:], "big")))
        except (ValueError, AssertionError):
            raise ValueError("invalid G2 encoding") from None
        if not _in_subgroup(pt):
            raise ValueError("invalid G2 encoding")
        out = G2(pt)
        if out.to_bytes() != bytes(b):
            raise ValueError("invalid G2 encoding")
        return out

    @staticmethod
    def hash(msg, dst):
        return G2(hash_to_G2(bytes(msg), bytes(dst), hashlib.sha256))

    def to_bytes(self):
        z1, z2 = compress_G2(self.p)
        return z1.to_bytes(48, "big") + z2.to_bytes(48, "big")

    def is_identity(self):
        return _c.is_inf(self.p)

    def mul(self, other):
        return G2(_c.add(self.p, other.p))

    def div(self, other):
        return G2(_c.add(self.p, _c.neg(other.p)))

    def inverse(self):
        return G2(_c.neg(self.p))

    def pow(self, k):
        return G2(_c.multiply(self.p, _scalar(k)))

    def __eq__(self, other):
        return isinstance(other, G2) and _c.eq(self.p, other.p)

    def __hash__(self):
        return hash(self.to_bytes())


# py_ecc stores Fp12 as a degree-12 polynomial in w with w^12 = 2w^6 - 2;
# the canonical encoding uses the Fp2 -> Fp6 -> Fp12 tower with u = w^6 - 1,
# v = w^2. Coefficient of u^k v^j w^i sits at flat exponent 2j + i.


def _to_tower(f):
    a = [int(c) for c in f.coeffs]
    limbs = []
    for i in range(2):
        for j in range(3):
            e = 2 * j + i
            limbs.append((a[e] + a[e + 6]) % _P)
            limbs.append(a[e + 6])
    return b"".join(x.to_bytes(48, "big") for x in limbs)


def _from_tower(b):
    limbs = [int.from_bytes(b[i : i + 48], "big") for i in range(0, 576, 48)]
    if any(x >= _P for x in limbs):
        raise ValueError("invalid GT encoding")
    a = [0] * 12
    for i in range(2):
        for j in range(3):
            e = 2 * j + i
            c0, c1 = limbs[2 * (3 * i + j)], limbs[2 * (3 * i + j) + 1]
            a[e] = (c0 - c1) % _P
            a[e + 6] = c1
    return _FQ12(a)


class GT:
    __slots__ = ("f",)

    def __init__(self, f):
        self.f = f

    @staticmethod
    def identity():
        return GT(_FQ12.one())

    @staticmethod
    def from_bytes(b):
        if len(b) != 576:
            raise ValueError("invalid GT encoding")
        f = _from_tower(b)
        if f == _FQ12.zero() or f**_R != _FQ12.one():
            raise ValueError("invalid GT encoding")
        return GT(f)

    def to_bytes(self):
        return _to_tower(self.f)

    def is_identity(self):
        return self.f == _FQ12.one()

    def mul(self, other):
        return GT(self.f * other.f)

    def div(self, other):
        return GT(self.f / other.f)

    def inverse(self):
        return GT(_FQ12.one() / self.f)

    def pow(self, k):
        return GT(self.f ** _scalar(k))

    def __eq__(self, other):
        return isinstance(other, GT) and self.f == other.f

    def __hash__(self):
        return hash(self.to_bytes())


def _normalise(f):
    # f^-3; inversion of a unitary element is conjugation but division is
    # cheap enough at this speed
    cube = f * f * f
    return GT(_FQ12.one() / cube)


def pair(a, b):
    if a.is_identity() or b.is_identity():
        return GT.identity()
    return _normalise(final_exponentiate(miller_loop(b.p, a.p, final_exponentiate=False)))


def multi_pair(left, right):
    if len(left) != len(right):
        raise TypeError("multi_pair needs equal-length sequences")
    acc = _FQ12.one()
    for a, b in zip(left, right):
        if a.is_identity() or b.is_identity():
            continue
        acc = acc * miller_loop(b.p, a.p, final_exponentiate=False)
    return _normalise(final_exponentiate(acc))
