import datetime as dt

import pytest

from phr_abe import ots
from phr_abe.errors import MalformedError
from phr_abe.pairing import seeded_rng
from phr_abe.timeval import ValiditySet

# -- one-time signatures -----------------------------------------------------


def test_sign_verify():
    sk, vk = ots.keygen(seeded_rng(1))
    assert len(vk) == ots.VK_BYTES
    sig = ots.sign(sk, b"record body")
    assert len(sig) == ots.SIG_BYTES
    assert ots.verify(vk, b"record body", sig)
    assert not ots.verify(vk, b"record body!", sig)
    bad = bytearray(sig)
    bad[10] ^= 4
    assert not ots.verify(vk, b"record body", bytes(bad))
    assert not ots.verify(vk, b"record body", sig[:-1])


def test_other_key_rejects():
    rng = seeded_rng(2)
    sk1, vk1 = ots.keygen(rng)
    _, vk2 = ots.keygen(rng)
    assert vk1 != vk2
    assert not ots.verify(vk2, b"m", ots.sign(sk1, b"m"))


def test_seeded_keygen_is_deterministic():
    assert ots.keygen(seeded_rng(3))[1] == ots.keygen(seeded_rng(3))[1]


def test_malformed_vk():
    sk, _ = ots.keygen(seeded_rng(4))
    with pytest.raises(ValueError):
        ots.verify(b"\x00" * 31, b"m", ots.sign(sk, b"m"))


# -- validity sets -----------------------------------------------------------


def test_between_and_membership():
    v = ValiditySet.between("2020-06-20", "2020-06-22")
    assert dt.date(2020, 6, 20) in v
    assert "2020-06-22" in v
    assert dt.datetime(2020, 6, 21, 23, 59) in v
    assert dt.date(2020, 6, 19) not in v
    assert dt.date(2020, 6, 23) not in v
    assert str(v) == "2020-06-20..2020-06-22"
    assert len(list(v.days())) == 3


def test_cover_is_minimal():
    v = ValiditySet.cover(
        ["2020-06-03", "2020-06-01", "2020-06-02", ("2020-06-10", "2020-06-12"), "2020-06-13"]
    )
    assert v.intervals == (
        (dt.date(2020, 6, 1), dt.date(2020, 6, 3)),
        (dt.date(2020, 6, 10), dt.date(2020, 6, 13)),
    )
    assert str(v) == "2020-06-01..2020-06-03, 2020-06-10..2020-06-13"
    assert str(ValiditySet.cover(["2021-01-01"])) == "2021-01-01"


def test_invalid_sets():
    with pytest.raises(ValueError):
        ValiditySet(())
    with pytest.raises(ValueError):
        ValiditySet.between("2020-06-22", "2020-06-20")
    with pytest.raises(ValueError):
        # adjacent intervals must be merged
        ValiditySet((("2020-01-01", "2020-01-02"), ("2020-01-03", "2020-01-04")))
    with pytest.raises(ValueError):
        ValiditySet.cover([])


def test_bytes_round_trip():
    v = ValiditySet.cover(["2020-06-01", ("2020-07-01", "2020-07-31"), "2024-02-29"])
    assert ValiditySet.from_bytes(v.to_bytes()) == v
    with pytest.raises(MalformedError):
        ValiditySet.from_bytes(v.to_bytes()[:-1])
    with pytest.raises(MalformedError):
        ValiditySet.from_bytes(b"\x00\x00")
    with pytest.raises(MalformedError):
        ValiditySet.from_bytes(b"\x00\x01" + b"\x00\x00\x00\x00" * 2)
