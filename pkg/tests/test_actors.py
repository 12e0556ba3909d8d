import pytest

from phr_abe import cpabe
from phr_abe.actors import (
    AttributeAuthority,
    FogNode,
    PHROwner,
    PHRUser,
    RecordStore,
    Session,
    authority_issue,
    fog_delegate_decrypt,
    owner_publish,
    record_id,
    user_fetch_decrypt,
)
from phr_abe.errors import KeyExpiredError, MalformedError, PolicyUnsatisfiedError, UnauthorizedRequest
from phr_abe.pairing import seeded_rng
from phr_abe.timeval import ValiditySet

from conftest import AFTER, INSIDE, WINDOW


@pytest.fixture(scope="module")
def world(group):
    rng = seeded_rng(31)
    aa = AttributeAuthority(group, rng)
    return aa, aa.public_params, rng


def test_issue(world):
    aa, _, _ = world
    k1 = aa.issue(["doctor"], WINDOW)
    k2 = authority_issue(aa, ["doctor"], WINDOW)
    assert k1.key_id != k2.key_id
    assert k1.d != k2.d  # independent r
    assert set(aa.registry) >= {k1.key_id, k2.key_id}
    assert aa.registry[k1.key_id].attributes == {"doctor"}
    with pytest.raises(ValueError):
        aa.issue([], WINDOW)


def test_unauthorized_request(world):
    aa, _, _ = world
    before = aa.policy_violations
    with pytest.raises(UnauthorizedRequest):
        aa.issue(["admin"], WINDOW, authorized=False)
    assert aa.policy_violations == before + 1


def test_master_key_stays_with_authority(world):
    aa, pk, _ = world
    key = aa.issue(["doctor"], WINDOW)
    mk_bytes = aa._master.to_bytes()
    for msg in (pk.to_bytes(), key.to_bytes()):
        assert mk_bytes[5:] not in msg
        assert bytes(aa._master.g_alpha) not in msg
    assert not hasattr(pk, "mk") and "_master" not in vars(pk)


def test_publish_fetch(world, group):
    aa, pk, rng = world
    store = RecordStore(group)
    rid = owner_publish(store, pk, "doctor or nurse", b"x-ray", owner_id="bob", rng=rng)
    assert rid == record_id(store.get_bytes(rid))
    assert rid in store and store.ids() == [rid]
    rec = store.get(rid)
    assert rec.owner_id == "bob"
    assert store.get_bytes(rid) == rec.to_bytes()
    key = aa.issue(["nurse"], WINDOW)
    assert user_fetch_decrypt(store, rid, key, INSIDE, pk) == b"x-ray"
    # the same content published twice gets two ids
    rid2 = PHROwner("bob", pk, rng).publish(store, "doctor or nurse", b"x-ray")
    assert rid2 != rid and len(store.ids()) == 2


def test_store_rejects_garbage(group):
    store = RecordStore(group)
    with pytest.raises(MalformedError):
        store.put(b"not a record")
    with pytest.raises(KeyError):
        store.get("0" * 64)
    assert "0" * 64 not in store


def test_file_store(world, group, tmp_path):
    aa, pk, rng = world
    store = RecordStore(group, tmp_path)
    rid = owner_publish(store, pk, "doctor", b"mri", owner_id="carol", rng=rng)
    assert (tmp_path / rid).read_bytes() == store.get_bytes(rid)
    # re-opening the directory sees the same record
    again = RecordStore(group, tmp_path)
    assert again.ids() == [rid]
    index = again.rebuild_index()
    assert index[rid]["owner"] == "carol"
    assert (tmp_path / "index.json").exists()
    assert again.ids() == [rid]
    # on-disk corruption is detected by the content address
    (tmp_path / rid).write_bytes(b"x" + (tmp_path / rid).read_bytes()[1:])
    with pytest.raises(MalformedError):
        again.get_bytes(rid)
    assert rid not in again
    with pytest.raises(KeyError):
        again.get_bytes("../etc/passwd")


def test_fog_example(world, group):
    # the user holds no key and relies on a fog node with its own key
    aa, pk, rng = world
    store = RecordStore(group)
    fog = FogNode("fog-1", pk, aa.issue(["doctor", "cardiology"], ValiditySet.between("2020-06-20", "2020-06-22")))
    assert fog.attributes == {"doctor", "cardiology"}
    user = PHRUser("dave", pk)
    rid = owner_publish(store, pk, "doctor and cardiology", b"angiogram", rng=rng)
    session = user.open_session(rng)
    assert user.via_fog(fog, store, rid, INSIDE, session) == b"angiogram"
    with pytest.raises(ValueError):
        user.fetch_decrypt(store, rid, INSIDE)
    with pytest.raises(KeyExpiredError):
        fog_delegate_decrypt(fog, store, rid, session, AFTER)
    denied = owner_publish(store, pk, "oncology", b"biopsy", rng=rng)
    with pytest.raises(PolicyUnsatisfiedError):
        user.via_fog(fog, store, denied, INSIDE, session)
    assert [d.outcome for d in fog.work_log] == ["ok", "KeyExpiredError", "PolicyUnsatisfiedError"]
    assert all(d.session_id == session.session_id and d.elapsed_us > 0 for d in fog.work_log)
    with pytest.raises(ValueError):
        user.via_fog(fog, store, rid, INSIDE, Session("eve", "stolen"))


def test_fog_matches_direct(world, group):
    aa, pk, rng = world
    store = RecordStore(group)
    attrs = ["doctor", "hospital-a"]
    user = PHRUser("erin", pk, aa.issue(attrs, WINDOW))
    fog = FogNode("fog-2", pk, aa.issue(attrs, WINDOW))
    for i, policy in enumerate(["doctor", "doctor and hospital-a", "1 of (x, hospital-a)"]):
        rid = owner_publish(store, pk, policy, bytes([i]) * 100, rng=rng)
        assert user.fetch_decrypt(store, rid, INSIDE) == user.via_fog(fog, store, rid, INSIDE)
    assert len(user.sessions) == 3


def test_record_id_is_sha256():
    import hashlib

    assert record_id(b"abc") == hashlib.sha256(b"abc").hexdigest()


def test_actor_messages_are_public_types(world, group):
    aa, pk, rng = world
    key = aa.issue(["doctor"], WINDOW)
    assert isinstance(key, cpabe.AttributeKey)
    assert isinstance(pk, cpabe.PublicParams)
