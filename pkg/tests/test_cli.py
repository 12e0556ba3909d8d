import json
import subprocess
import sys

import pytest

from phr_abe.cli import main


@pytest.fixture(scope="module")
def env(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["setup", "--out", str(d), "--seed", "1"]) == 0
    (d / "note.txt").write_bytes(b"blood pressure 120/80\n")
    assert main(["keygen", "--pk", str(d / "pk.bin"), "--mk", str(d / "mk.bin"),
                 "--attrs", "doctor,cardiology", "--valid", "2020-06-20..2020-06-22",
                 "--out", str(d / "doc.key"), "--seed", "2"]) == 0
    assert main(["encrypt", "--pk", str(d / "pk.bin"), "--policy", "doctor and cardiology",
                 "--in", str(d / "note.txt"), "--out", str(d / "note.rec"), "--seed", "3"]) == 0
    return d


def decrypt(d, *extra, key="doc.key", rec="note.rec"):
    return main(["decrypt", "--pk", str(d / "pk.bin"), "--key", str(d / key),
                 "--in", str(d / rec), "--out", str(d / "out.txt"), *extra])


def test_round_trip(env):
    assert decrypt(env, "--date", "2020-06-21") == 0
    assert (env / "out.txt").read_bytes() == b"blood pressure 120/80\n"


def test_expired_exit_code(env, capsys):
    assert decrypt(env, "--date", "2020-06-23") == 4
    assert "expired" in capsys.readouterr().err


def test_policy_exit_code(env):
    assert main(["keygen", "--pk", str(env / "pk.bin"), "--mk", str(env / "mk.bin"),
                 "--attrs", "nurse", "--valid", "2020-06-21", "--out", str(env / "nurse.key")]) == 0
    assert decrypt(env, "--date", "2020-06-21", key="nurse.key") == 3


def test_tampered_exit_code(env):
    data = bytearray((env / "note.rec").read_bytes())
    data[-70] ^= 1
    (env / "bad.rec").write_bytes(bytes(data))
    assert decrypt(env, "--date", "2020-06-21", rec="bad.rec") == 2


def test_usage_exit_codes(env, capsys):
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["decrypt", "--pk", "x"])
    assert e.value.code == 1
    assert decrypt(env, "--date", "2020-06-21", key="missing.key") == 1
    assert main(["encrypt", "--pk", str(env / "pk.bin"), "--policy", "a and",
                 "--in", str(env / "note.txt"), "--out", str(env / "x.rec")]) == 1
    assert main(["sizes"]) == 1
    capsys.readouterr()


def test_sizes(env, capsys):
    args = ["--pk", str(env / "pk.bin"), "--mk", str(env / "mk.bin"), "--valid", "2020-06-21"]
    assert main(["keygen", *args, "--attrs", ",".join(f"a{i}" for i in range(10)),
                 "--out", str(env / "ten.key")]) == 0
    capsys.readouterr()
    assert main(["--json", "sizes", "--key", str(env / "ten.key"), "--record",
                 str(env / "note.rec"), "--pk", str(env / "pk.bin")]) == 0
    pk_rep, key_rep, rec_rep = json.loads(capsys.readouterr().out)
    assert key_rep["source_elements"] == 22
    assert (key_rep["g1_elements"], key_rep["g2_elements"]) == (10, 12)
    assert rec_rep["source_elements"] == 3 + 2 * 2
    assert pk_rep["notes"]
    assert main(["sizes", "--key", str(env / "ten.key")]) == 0
    assert "22 source elements" in capsys.readouterr().out


def test_store_flow(env, capsys):
    store = env / "store"
    assert main(["--json", "publish", "--pk", str(env / "pk.bin"), "--store", str(store),
                 "--policy", "doctor", "--in", str(env / "note.txt"), "--owner", "alice"]) == 0
    rid = json.loads(capsys.readouterr().out)["record_id"]
    assert (store / rid).exists()
    common = ["--pk", str(env / "pk.bin"), "--store", str(store), "--id", rid, "--date", "2020-06-21"]
    assert main(["fetch", *common, "--key", str(env / "doc.key"), "--out", str(env / "f.txt")]) == 0
    assert main(["--json", "delegate", *common, "--fog-key", str(env / "doc.key"),
                 "--session", "s1", "--out", str(env / "g.txt")]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["session"] == "s1" and info["elapsed_us"] > 0
    assert (env / "f.txt").read_bytes() == (env / "g.txt").read_bytes() == b"blood pressure 120/80\n"
    assert main(["fetch", *common[:4], "--id", "0" * 64, "--key", str(env / "doc.key"),
                 "--out", str(env / "h.txt")]) == 1


def test_bench_smoke(tmp_path, capsys):
    out = tmp_path / "b.csv"
    assert main(["--json", "bench", "--counts", "1,2,3", "--reps", "3", "--out", str(out)]) == 0
    res = json.loads(capsys.readouterr().out)
    assert len(res["rows"]) == 9
    assert out.read_text().splitlines()[0] == "phase,attrs,median_us,mean_us,stddev_us,elements"
    assert main(["bench", "--counts", "1", "--reps", "2"]) == 1


def test_module_entry_point(env):
    r = subprocess.run([sys.executable, "-m", "phr_abe", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip()
