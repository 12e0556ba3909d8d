"""In-process model of the PHR deployment.

Roles: the attribute authority issues keys, owners publish sealed records to
a content-addressed store, users decrypt directly, or hand the work to a fog
node that holds its own attribute key and relays the plaintext back over the
user's session.

Messages between roles are the public types only (PublicParams,
AttributeKey, SealedRecord, bytes); the master key never leaves the
authority object.
"""

import hashlib
import json
import logging
import os
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import cpabe
from .errors import DecryptionError, KeyExpiredError, MalformedError, UnauthorizedRequest
from .pairing import PairingGroup, default_rng
from .policy import parse_policy
from .timeval import ValiditySet

log = logging.getLogger(__name__)


def record_id(data):
    """Content address: SHA-256 of the serialized record, hex."""
    return hashlib.sha256(bytes(data)).hexdigest()


@dataclass
class Issuance:
    key_id: str
    attributes: frozenset
    validity: ValiditySet
    issued_at: float


class AttributeAuthority:
    def __init__(self, group=None, rng=None):
        self._rng = rng or default_rng()
        self.public_params, self._master = cpabe.setup(group or PairingGroup(), self._rng)
        self.registry = {}
        self.policy_violations = 0

    def issue(self, attrs, validity, authorized=True):
        """Issue an attribute key and record it. ``authorized`` simulates
        the out-of-band check that the requester may hold these attributes."""
        if not authorized:
            self.policy_violations += 1
            raise UnauthorizedRequest("requester is not authorized for these attributes")
        key = cpabe.keygen(self.public_params, self._master, attrs, validity, self._rng)
        self.registry[key.key_id] = Issuance(key.key_id, key.attributes, key.validity, time.time())
        return key


def authority_issue(authority, attrs, validity, authorized=True):
    return authority.issue(attrs, validity, authorized)


class RecordStore:
    """Content-addressed store of sealed records.

    With ``root`` set, each record lives in ``<root>/<record-id-hex>``; the
    ``index.json`` next to them is a cache that :meth:`rebuild_index` can
    regenerate at any time. Without ``root`` the store is in memory.
    """

    INDEX = "index.json"

    def __init__(self, group, root=None):
        self.group = group
        self.root = Path(root) if root is not None else None
        self._mem = {}
        self._locks = {}
        self._guard = threading.Lock()
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)

    def _lock(self, rid):
        with self._guard:
            return self._locks.setdefault(rid, threading.Lock())

    def put(self, record):
        data = record if isinstance(record, (bytes, bytearray)) else record.to_bytes()
        data = bytes(data)
        # reject anything that is not a well-formed record
        cpabe.SealedRecord.from_bytes(data, self.group)
        rid = record_id(data)
        with self._lock(rid):
            if self.root is None:
                self._mem[rid] = data
            else:
                path = self.root / rid
                if not path.exists():
                    fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tmp-")
                    with os.fdopen(fd, "wb") as fh:
                        fh.write(data)
                    os.replace(tmp, path)
        return rid

    def get_bytes(self, rid):
        if self.root is None:
            try:
                data = self._mem[rid]
            except KeyError:
                raise KeyError(f"no record {rid}") from None
        else:
            if len(rid) != 64 or any(c not in "0123456789abcdef" for c in rid):
                raise KeyError(f"no record {rid}")
            try:
                data = (self.root / rid).read_bytes()
            except FileNotFoundError:
                raise KeyError(f"no record {rid}") from None
        if record_id(data) != rid:
            raise MalformedError(f"stored bytes for {rid} do not match their address")
        return data

    def get(self, rid):
        return cpabe.SealedRecord.from_bytes(self.get_bytes(rid), self.group)

    def __contains__(self, rid):
        try:
            self.get_bytes(rid)
        except (KeyError, MalformedError):
            return False
        return True

    def ids(self):
        if self.root is None:
            return sorted(self._mem)
        return sorted(
            p.name for p in self.root.iterdir() if len(p.name) == 64 and not p.name.startswith(".")
        )

    def rebuild_index(self):
        entries = {}
        for rid in self.ids():
            rec = self.get(rid)
            entries[rid] = {"owner": rec.owner_id, "created_at": rec.created_at}
        if self.root is not None:
            (self.root / self.INDEX).write_text(json.dumps(entries, indent=1, sort_keys=True))
        return entries


class PHROwner:
    def __init__(self, owner_id, public_params, rng=None):
        self.owner_id = owner_id
        self.public_params = public_params
        self._rng = rng or default_rng()

    def publish(self, store, policy_text, payload):
        tree = parse_policy(policy_text)
        rec = cpabe.encrypt(self.public_params, tree, payload, self._rng, owner_id=self.owner_id)
        return store.put(rec)


def owner_publish(store, pk, policy_text, payload, owner_id="", rng=None):
    return PHROwner(owner_id, pk, rng).publish(store, policy_text, payload)


def user_fetch_decrypt(store, rid, sk, now, pk):
    return cpabe.decrypt(pk, sk, store.get(rid), now)


@dataclass(frozen=True)
class Session:
    user_id: str
    session_id: str


@dataclass
class Delegation:
    record_id: str
    session_id: str
    elapsed_us: float
    outcome: str


class FogNode:
    """Decrypts on behalf of users with the node's own attribute key."""

    def __init__(self, node_id, public_params, key):
        self.node_id = node_id
        self.public_params = public_params
        self._key = key
        self.work_log = []

    @property
    def attributes(self):
        return self._key.attributes

    def delegate_decrypt(self, store, rid, session, now):
        start = time.perf_counter()
        outcome = "ok"
        try:
            if now not in self._key.validity:
                raise KeyExpiredError(f"fog node {self.node_id} key not valid on {now}")
            return cpabe.decrypt(self.public_params, self._key, store.get(rid), now)
        except DecryptionError as exc:
            outcome = type(exc).__name__
            raise
        finally:
            elapsed = (time.perf_counter() - start) * 1e6
            self.work_log.append(Delegation(rid, session.session_id, elapsed, outcome))
            log.debug("fog %s: %s for session %s in %.0f us", self.node_id, outcome,
                      session.session_id, elapsed)


def fog_delegate_decrypt(fog, store, rid, session, now):
    return fog.delegate_decrypt(store, rid, session, now)


@dataclass
class PHRUser:
    user_id: str
    public_params: object
    key: object = None
    sessions: list = field(default_factory=list)

    def open_session(self, rng=None):
        rng = rng or default_rng()
        s = Session(self.user_id, f"{self.user_id}-{rng.getrandbits(64):016x}")
        self.sessions.append(s)
        return s

    def fetch_decrypt(self, store, rid, now):
        if self.key is None:
            raise ValueError("user holds no attribute key; delegate to a fog node")
        return user_fetch_decrypt(store, rid, self.key, now, self.public_params)

    def via_fog(self, fog, store, rid, now, session=None):
        session = session or self.open_session()
        if session not in self.sessions:
            raise ValueError("session does not belong to this user")
        return fog.delegate_decrypt(store, rid, session, now)
