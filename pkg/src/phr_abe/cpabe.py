"""CP-ABE with time-limited keys and signature-bound ciphertexts.

Four phases: :func:`setup`, :func:`keygen`, :func:`encrypt`, :func:`decrypt`.

Every ciphertext carries a fresh one-time Ed25519 verification key ``vk``.
The encryption secret s is split by a 2-of-2 gate whose first child is the
policy root and whose second child is a node bound to H(vk), so recovering
K = e(g1, g2)^(alpha*s) needs both a satisfying key and the exact vk the
record was signed with.

Functions that take ``transcript`` (a dict) record their secret randomness
into it. That is for tests only; never pass one in production.
"""

import datetime as dt
import time
from dataclasses import dataclass, field, replace

from . import ots
from .encoding import Reader, Writer
from .envelope import EnvelopePayload, derive_key, open_envelope, seal
from .errors import (
    MalformedError,
    MalformedRecordError,
    KeyExpiredError,
    PolicyUnsatisfiedError,
    SignatureInvalidError,
)
from .pairing import (
    CURVE_ID,
    PairingGroup,
    default_rng,
    inv,
    random_bytes,
    random_scalar,
    scalar_bytes,
    scalar_from_bytes,
)
from .policy import (
    Gate,
    Leaf,
    lagrange_coeff,
    leaves,
    normalize_attributes,
    parse_policy,
    satisfies,
    share_secret,
    tree_from_bytes,
    tree_to_bytes,
)
from .timeval import ValiditySet

FORMAT_VERSION = 1
SUPPORTED_SECURITY = (128,)
MAGIC_PK = b"PHRPK"
MAGIC_MK = b"PHRMK"
MAGIC_SK = b"PHRSK"
MAGIC_RECORD = b"PHRCT"
POLICY_INDEX = 1
VK_INDEX = 2


def _attr_label(attr):
    return b"attr:" + attr.encode("utf-8")


def _vk_label(vk):
    return b"vk:" + bytes(vk)


def _header(w, magic):
    return w.raw(magic).u8(FORMAT_VERSION)


def _check_header(r, magic):
    r.expect(magic)
    version = r.u8()
    if version != FORMAT_VERSION:
        raise MalformedError(f"unsupported format version {version}")


@dataclass(frozen=True)
class PublicParams:
    group: PairingGroup
    h1: object  # G1: g1^beta1
    h2: object  # G1: g1^beta2
    egg_alpha: object  # GT: e(g1, g2)^alpha

    def hash_attribute(self, attr):
        return self.group.hash_to_group(_attr_label(attr))

    def hash_vk(self, vk):
        return self.group.hash_to_group(_vk_label(vk))

    def to_bytes(self):
        w = _header(Writer(), MAGIC_PK)
        w.text(self.group.curve_id).blob(self.group.hash_context)
        w.raw(bytes(self.h1)).raw(bytes(self.h2)).raw(bytes(self.egg_alpha))
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data, backend=None):
        r = Reader(data, "public parameters")
        _check_header(r, MAGIC_PK)
        curve = r.text()
        if curve != CURVE_ID:
            raise MalformedError(f"unsupported curve {curve!r}")
        group = PairingGroup(backend, hash_context=r.blob())
        pk = cls(group, r.element(group, "G1"), r.element(group, "G1"), r.element(group, "GT"))
        r.done()
        if pk.h1.is_identity() or pk.h2.is_identity() or pk.egg_alpha.is_identity():
            raise MalformedError("degenerate public parameters")
        return pk


@dataclass(frozen=True)
class MasterKey:
    beta1: int
    beta2: int
    g_alpha: object  # G2: g2^alpha

    def __repr__(self):
        return "MasterKey(<secret>)"

    def to_bytes(self):
        w = _header(Writer(), MAGIC_MK)
        w.raw(scalar_bytes(self.beta1)).raw(scalar_bytes(self.beta2)).raw(bytes(self.g_alpha))
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data, group):
        r = Reader(data, "master key")
        _check_header(r, MAGIC_MK)
        try:
            b1, b2 = scalar_from_bytes(r.raw(32)), scalar_from_bytes(r.raw(32))
        except ValueError as exc:
            raise MalformedError(str(exc)) from None
        mk = cls(b1, b2, r.element(group, "G2"))
        r.done()
        if b1 == 0 or b2 == 0 or b1 == b2:
            raise MalformedError("invalid master key exponents")
        return mk


@dataclass(frozen=True)
class KeyComponent:
    attribute: str
    d: object  # G2: g2^r * H(j)^r_j
    d_prime: object  # G1: g1^r_j


@dataclass(frozen=True)
class AttributeKey:
    d: object  # G2: g2^((alpha + r) / beta1)
    e: object  # G2: g2^(r / beta2)
    components: tuple
    validity: ValiditySet
    key_id: str

    @property
    def attributes(self):
        return frozenset(c.attribute for c in self.components)

    def component(self, attr):
        for c in self.components:
            if c.attribute == attr:
                return c
        return None

    @property
    def source_element_count(self):
        return 2 + 2 * len(self.components)

    def to_bytes(self):
        w = _header(Writer(), MAGIC_SK)
        w.raw(bytes.fromhex(self.key_id))
        self.validity.encode(w)
        w.raw(bytes(self.d)).raw(bytes(self.e)).u16(len(self.components))
        for c in self.components:
            w.text(c.attribute).raw(bytes(c.d)).raw(bytes(c.d_prime))
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data, group):
        r = Reader(data, "attribute key")
        _check_header(r, MAGIC_SK)
        key_id = r.raw(16).hex()
        validity = ValiditySet.decode(r)
        d, e = r.element(group, "G2"), r.element(group, "G2")
        comps = []
        for _ in range(r.u16()):
            comps.append(KeyComponent(r.text(), r.element(group, "G2"), r.element(group, "G1")))
        r.done()
        names = [c.attribute for c in comps]
        if not names or len(set(names)) != len(names):
            raise MalformedError("attribute key needs distinct, non-empty attributes")
        return cls(d, e, tuple(comps), validity, key_id)


@dataclass(frozen=True)
class SealedRecord:
    tree: object
    c1: object  # G1: h1^s
    leaf_pairs: tuple  # per leaf in tree order: (G1 g1^q_y, G2 H(att)^q_y)
    c_vk: object  # G1: h2^q_vk
    c_vk_prime: object  # G2: H(vk)^q_vk
    vk: bytes
    envelope: EnvelopePayload
    owner_id: str = ""
    created_at: int = 0
    sigma: bytes = b""

    def ct_bytes(self):
        """Canonical CT: tree, C1, leaf pairs in tree order, vk pair, vk."""
        w = Writer().blob(tree_to_bytes(self.tree)).raw(bytes(self.c1))
        w.u32(len(self.leaf_pairs))
        for c, cp in self.leaf_pairs:
            w.raw(bytes(c)).raw(bytes(cp))
        w.raw(bytes(self.c_vk)).raw(bytes(self.c_vk_prime)).raw(self.vk)
        return w.getvalue()

    def signed_bytes(self):
        w = _header(Writer(), MAGIC_RECORD)
        w.blob(self.ct_bytes()).text(self.owner_id).u64(self.created_at)
        w.blob(self.envelope.to_bytes())
        return w.getvalue()

    def to_bytes(self):
        return Writer().raw(self.signed_bytes()).blob(self.sigma).getvalue()

    @property
    def leaf_map(self):
        return {path: pair for (path, _), pair in zip(leaves(self.tree), self.leaf_pairs)}

    @property
    def source_element_count(self):
        return 1 + 2 * len(self.leaf_pairs) + 2

    @classmethod
    def from_bytes(cls, data, group):
        try:
            return cls._parse(data, group)
        except MalformedError as exc:
            raise MalformedRecordError(str(exc)) from None

    @classmethod
    def _parse(cls, data, group):
        r = Reader(data, "sealed record")
        _check_header(r, MAGIC_RECORD)
        ct = Reader(r.blob(), "ciphertext")
        tree = tree_from_bytes(ct.blob())
        c1 = ct.element(group, "G1")
        n = ct.u32()
        if n != len(leaves(tree)):
            raise MalformedError("leaf component count does not match policy")
        pairs = tuple((ct.element(group, "G1"), ct.element(group, "G2")) for _ in range(n))
        c_vk, c_vk_prime = ct.element(group, "G1"), ct.element(group, "G2")
        vk = ct.raw(ots.VK_BYTES)
        ct.done()
        owner = r.text()
        created = r.u64()
        env = EnvelopePayload.from_bytes(r.blob())
        sigma = r.blob()
        r.done()
        return cls(tree, c1, pairs, c_vk, c_vk_prime, vk, env, owner, created, sigma)


# -- Setup -------------------------------------------------------------------


def setup(group=None, rng=None, security=128, transcript=None):
    """Return (PublicParams, MasterKey)."""
    if security not in SUPPORTED_SECURITY:
        raise ValueError(f"unsupported security parameter {security}")
    group = group or PairingGroup()
    rng = rng or default_rng()
    alpha = random_scalar(rng)
    beta1 = random_scalar(rng)
    while beta1 == 0:
        beta1 = random_scalar(rng)
    beta2 = random_scalar(rng)
    resampled = 0
    while beta2 == 0 or beta2 == beta1:
        resampled += 1
        beta2 = random_scalar(rng)
    pk = PublicParams(group, group.g1**beta1, group.g1**beta2, group.gt**alpha)
    mk = MasterKey(beta1, beta2, group.g2**alpha)
    if transcript is not None:
        transcript.update(alpha=alpha, beta1=beta1, beta2=beta2, resampled=resampled)
    return pk, mk


# -- KeyGen ------------------------------------------------------------------


def keygen(pk, mk, attrs, validity, rng=None, transcript=None):
    attrs = normalize_attributes(attrs)
    if not attrs:
        raise ValueError("attribute set must not be empty")
    if not isinstance(validity, ValiditySet):
        validity = ValiditySet.cover(validity)
    rng = rng or default_rng()
    g = pk.group
    r = random_scalar(rng)
    d = (mk.g_alpha * g.g2**r) ** inv(mk.beta1)
    e = g.g2 ** (r * inv(mk.beta2))
    g2r = g.g2**r
    comps = []
    rjs = {}
    for attr in attrs:
        rj = random_scalar(rng)
        rjs[attr] = rj
        comps.append(KeyComponent(attr, g2r * pk.hash_attribute(attr) ** rj, g.g1**rj))
    key_id = random_bytes(rng, 16).hex()
    if transcript is not None:
        transcript.update(r=r, r_j=rjs, key_id=key_id)
    return AttributeKey(d, e, tuple(comps), validity, key_id)


# -- Encrypt -----------------------------------------------------------------


def encrypt(pk, tree, payload, rng=None, owner_id="", created_at=None, transcript=None):
    if isinstance(tree, str):
        tree = parse_policy(tree)
    if not isinstance(tree, (Gate, Leaf)):
        raise TypeError("policy must be policy text or an access tree")
    rng = rng or default_rng()
    g = pk.group
    signing_key, vk = ots.keygen(rng)

    s = random_scalar(rng)
    # 2-of-2 super-root: q(x) = s + a*x, policy root at x=1, vk node at x=2
    a = random_scalar(rng)
    q_root = (s + a * POLICY_INDEX) % g.order
    q_vk = (s + a * VK_INDEX) % g.order
    shares = share_secret(tree, q_root, rng)

    pairs = []
    for path, leaf in leaves(tree):
        q = shares[path]
        pairs.append((g.g1**q, pk.hash_attribute(leaf.attribute) ** q))
    k = pk.egg_alpha**s
    env = seal(derive_key(k), payload, rng)
    rec = SealedRecord(
        tree=tree,
        c1=pk.h1**s,
        leaf_pairs=tuple(pairs),
        c_vk=pk.h2**q_vk,
        c_vk_prime=pk.hash_vk(vk) ** q_vk,
        vk=vk,
        envelope=env,
        owner_id=owner_id,
        created_at=int(time.time()) if created_at is None else int(created_at),
    )
    rec = replace(rec, sigma=ots.sign(signing_key, rec.signed_bytes()))
    if transcript is not None:
        transcript.update(s=s, q_root=q_root, q_vk=q_vk, shares=shares, K=k)
    return rec


# -- Decrypt -----------------------------------------------------------------


def _as_record(pk, rec):
    if isinstance(rec, (bytes, bytearray, memoryview)):
        return SealedRecord.from_bytes(rec, pk.group)
    return rec


def verify_record(rec):
    try:
        ok = ots.verify(rec.vk, rec.signed_bytes(), rec.sigma)
    except ValueError:
        ok = False
    if not ok:
        raise SignatureInvalidError("record signature does not verify under its vk")


def _scaled(x, w):
    w %= PairingGroup.order
    if w == 1:
        return x
    if w == PairingGroup.order - 1:
        return x.inverse()
    return x**w


def _vk_terms(pk, sk, rec, w=1):
    hv_e = pk.hash_vk(rec.vk) * sk.e
    return [(_scaled(rec.c_vk, w), hv_e), (_scaled(pk.h2, -w), rec.c_vk_prime)]


def vk_node_value(pk, sk, rec):
    """F_vk = e(C_vk, H(vk) * E) / e(h2, C'_vk) = e(g1, g2)^(r * q_vk(0))."""
    return pk.group.multi_pair(_vk_terms(pk, sk, rec))


def decrypt_node(pk, sk, rec, path, assignment):
    """Per-node evaluation: e(g1, g2)^(r * q_x(0)), or None.

    Leaves pair their key and ciphertext components directly; gates combine
    the chosen children with Lagrange coefficients at 0.
    """
    node = _node(rec.tree, path)
    group = pk.group
    if isinstance(node, Leaf):
        comp = sk.component(node.attribute)
        if comp is None:
            return None
        c, c_prime = rec.leaf_map[path]
        return group.pair(c, comp.d) / group.pair(comp.d_prime, c_prime)
    chosen = assignment.chosen.get(path) if assignment else None
    if chosen is None or len(chosen) != node.threshold:
        return None
    acc = None
    for i in chosen:
        f = decrypt_node(pk, sk, rec, path + (i,), assignment)
        if f is None:
            return None
        term = f ** lagrange_coeff(i, chosen)
        acc = term if acc is None else acc * term
    return acc


def _node(tree, path):
    node = tree
    for i in path:
        node = node.children[i - 1]
    return node


def leaf_weights(tree, assignment):
    """{leaf path: product of Lagrange coefficients from the root down}."""
    out = {}

    def walk(node, path, w):
        if isinstance(node, Leaf):
            out[path] = w
            return
        chosen = assignment.chosen[path]
        for i in chosen:
            walk(node.children[i - 1], path + (i,), w * lagrange_coeff(i, chosen) % PairingGroup.order)

    walk(tree, (), 1)
    return out


def _policy_terms(pk, sk, rec, assignment, scale=1):
    leaf_map = rec.leaf_map
    terms = []
    for path, w in leaf_weights(rec.tree, assignment).items():
        comp = sk.component(_node(rec.tree, path).attribute)
        c, c_prime = leaf_map[path]
        w = w * scale
        terms.append((_scaled(c, w), comp.d))
        terms.append((_scaled(comp.d_prime, -w), c_prime))
    return terms


def policy_value(pk, sk, rec, assignment):
    """Same value as ``decrypt_node`` at the root, as one multi-pairing.

    Each used leaf contributes e(C_y^w, D_i) * e(D'_i^-w, C'_y) where w is
    the product of Lagrange coefficients on its path.
    """
    return pk.group.multi_pair(_policy_terms(pk, sk, rec, assignment))


def decrypt(pk, sk, rec, now, transcript=None):
    """Recover the payload, or raise a :class:`DecryptionError` subclass.

    Checks run in order: signature, key validity at ``now``, policy
    satisfaction. No pairing is evaluated until all three pass.
    """
    rec = _as_record(pk, rec)
    verify_record(rec)
    if isinstance(now, dt.datetime):
        now = now.date()
    if now not in sk.validity:
        raise KeyExpiredError(f"key {sk.key_id} is not valid on {now.isoformat()}")
    assignment = satisfies(rec.tree, sk.attributes)
    if assignment is None:
        raise PolicyUnsatisfiedError("key attributes do not satisfy the record policy")

    # K = e(C1, D) / (F_root^d1 * F_vk^d2), folded into a single multi-pairing
    # by moving the exponents -d1, -d2 onto the G1 side of each term
    idx = (POLICY_INDEX, VK_INDEX)
    d1, d2 = lagrange_coeff(POLICY_INDEX, idx), lagrange_coeff(VK_INDEX, idx)
    terms = [(rec.c1, sk.d)]
    terms += _policy_terms(pk, sk, rec, assignment, -d1)
    terms += _vk_terms(pk, sk, rec, -d2)
    k = pk.group.multi_pair(terms)
    if transcript is not None:
        f_vk = vk_node_value(pk, sk, rec)
        f_root = policy_value(pk, sk, rec, assignment)
        transcript.update(F_vk=f_vk, F_root=f_root, A=f_root**d1 * f_vk**d2, K=k,
                          assignment=assignment)
    return open_envelope(derive_key(k), rec.envelope)


# -- size accounting ---------------------------------------------------------


@dataclass
class SizeReport:
    kind: str
    components: list = field(default_factory=list)  # (name, group, bytes)
    notes: list = field(default_factory=list)

    def add(self, name, group, nbytes):
        self.components.append((name, group, nbytes))

    def count(self, *groups):
        return sum(1 for _, g, _ in self.components if g in groups)

    @property
    def source_elements(self):
        return self.count("G1", "G2")

    @property
    def target_elements(self):
        return self.count("GT")

    @property
    def scalars(self):
        return self.count("Zp")

    @property
    def aux_bytes(self):
        return sum(b for _, g, b in self.components if g == "aux")

    @property
    def total_bytes(self):
        return sum(b for _, _, b in self.components)

    def as_dict(self):
        return {
            "kind": self.kind,
            "source_elements": self.source_elements,
            "g1_elements": self.count("G1"),
            "g2_elements": self.count("G2"),
            "target_elements": self.target_elements,
            "scalars": self.scalars,
            "aux_bytes": self.aux_bytes,
            "total_bytes": self.total_bytes,
            "components": [list(c) for c in self.components],
            "notes": list(self.notes),
        }


def size_report(obj):
    if isinstance(obj, PublicParams):
        rep = SizeReport("public-params")
        rep.add("curve id", "aux", len(CURVE_ID.encode()))
        rep.add("hash context H", "aux", len(obj.group.hash_context))
        rep.add("h1", "G1", obj.h1.size)
        rep.add("h2", "G1", obj.h2.size)
        rep.add("e(g1,g2)^alpha", "GT", obj.egg_alpha.size)
        rep.notes.append(
            "g1, g2 and p are fixed by the curve and not transmitted; "
            "published figure 11|G_1| + H counts the group descriptors, "
            "generators, p and the master key together with PK"
        )
        return rep
    if isinstance(obj, MasterKey):
        rep = SizeReport("master-key")
        rep.add("beta1", "Zp", 32)
        rep.add("beta2", "Zp", 32)
        rep.add("g^alpha", "G2", obj.g_alpha.size)
        return rep
    if isinstance(obj, AttributeKey):
        rep = SizeReport("attribute-key")
        rep.add("D", "G2", obj.d.size)
        rep.add("E", "G2", obj.e.size)
        for c in obj.components:
            rep.add(f"D_{c.attribute}", "G2", c.d.size)
            rep.add(f"D'_{c.attribute}", "G1", c.d_prime.size)
        rep.add("validity", "aux", len(obj.validity.to_bytes()))
        rep.add("key id", "aux", 16)
        rep.notes.append(f"(2 + 2|S|) source elements with |S| = {len(obj.components)}")
        return rep
    if isinstance(obj, SealedRecord):
        rep = SizeReport("sealed-record")
        rep.add("policy tree", "aux", len(tree_to_bytes(obj.tree)))
        rep.add("C1", "G1", obj.c1.size)
        for (path, leaf), (c, cp) in zip(leaves(obj.tree), obj.leaf_pairs):
            rep.add(f"C_{leaf.attribute}", "G1", c.size)
            rep.add(f"C'_{leaf.attribute}", "G2", cp.size)
        rep.add("C_vk", "G1", obj.c_vk.size)
        rep.add("C'_vk", "G2", obj.c_vk_prime.size)
        rep.add("vk", "aux", len(obj.vk))
        rep.add("sigma", "aux", len(obj.sigma))
        rep.add("envelope", "aux", len(obj.envelope.to_bytes()))
        return rep
    raise TypeError(f"no size report for {type(obj).__name__}")
