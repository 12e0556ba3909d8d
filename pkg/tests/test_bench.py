import pytest

from phr_abe import bench
from phr_abe.pairing import available_backends
from phr_abe.policy import Gate, Leaf, leaves


def test_policy_shapes():
    attrs = bench.bench_attributes(7)
    assert attrs[0] == "attr000" and len(set(attrs)) == 7
    t = bench.bench_policy(attrs, "and")
    assert isinstance(t, Gate) and t.threshold == 7
    assert bench.bench_policy(attrs, "or").threshold == 1
    t = bench.bench_policy(attrs, "threshold")
    assert sorted(l.attribute for _, l in leaves(t)) == attrs
    assert bench.bench_policy(attrs[:1]) == Leaf("attr000")


def test_config_validation():
    with pytest.raises(ValueError):
        bench.BenchConfig(repetitions=2)
    with pytest.raises(ValueError):
        bench.BenchConfig(counts=(0, 5))
    with pytest.raises(ValueError):
        bench.BenchConfig(shape="star")


def test_element_counts_are_deterministic(tmp_path):
    cfg = bench.BenchConfig(counts=(2, 4), repetitions=3, output=tmp_path / "r.csv")
    rows = bench.run_bench(cfg)
    again = bench.run_bench(bench.BenchConfig(counts=(2, 4), repetitions=3))
    el = {(r.phase, r.attrs): r.elements for r in rows}
    assert el == {(r.phase, r.attrs): r.elements for r in again}
    assert el[("keygen", 4)] == 2 + 2 * 4
    assert el[("encrypt", 4)] == 3 + 2 * 4
    # decrypt pairs: (C1, D), two per used leaf, two for the vk node
    assert el[("decrypt", 4)] == 1 + 2 * 4 + 2
    back = bench.read_csv(cfg.output)
    assert [(r.phase, r.attrs, r.elements) for r in back] == [
        (r.phase, r.attrs, r.elements) for r in rows
    ]
    assert all(r.median_us > 0 and len(r.samples) == 3 for r in rows)


def test_linear_fit():
    s, i, r2 = bench.linear_fit([1, 2, 3, 4], [3, 5, 7, 9])
    assert (round(s, 9), round(i, 9), round(r2, 9)) == (2, 1, 1)
    assert bench.linear_fit([1, 2], [5, 5])[2] == 1.0


def test_budget_lookup():
    rows = [bench.BenchRow("decrypt", 25, 80_000.0, 80_000.0, 0.0, 52)]
    assert bench.decrypt_within_budget(rows, 25, 100) == (True, 80.0)
    assert bench.decrypt_within_budget(rows, 25, 50) == (False, 80.0)
    assert bench.decrypt_within_budget(rows, 30) == (None, None)


@pytest.mark.skipif("native" not in available_backends(), reason="native backend not built")
def test_compare_backends_native_only():
    res = bench.compare_backends(3, ["native"])
    ops = {op for _, op, _ in res}
    assert {"pair", "multi_pair_2", "hash_to_group"} <= ops
    assert all(t > 0 for _, _, t in res)
