"""Attribute-count sweep for keygen, encrypt and decrypt.

Each (phase, count) cell builds its own inputs untimed and runs one
discarded warm-up; ``repetitions`` calls of the operation alone are then
timed with the monotonic clock, interleaved across cells. Results go to a CSV with header
``phase,attrs,median_us,mean_us,stddev_us,elements``.

``elements`` is structural and independent of timing: source-group elements
in the issued key (keygen) or ciphertext (encrypt), and pairings evaluated
(decrypt).
"""

import csv
import datetime as dt
import gc
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import cpabe
from .pairing import PairingGroup, available_backends, seeded_rng
from .policy import Gate, Leaf
from .timeval import ValiditySet

PHASES = ("keygen", "encrypt", "decrypt")
SHAPES = ("and", "or", "threshold")
HEADER = ["phase", "attrs", "median_us", "mean_us", "stddev_us", "elements"]
BENCH_DAY = dt.date(2020, 6, 21)
BENCH_VALIDITY = ValiditySet.between("2020-06-20", "2020-06-22")


@dataclass
class BenchConfig:
    counts: tuple = tuple(range(5, 41, 5))
    repetitions: int = 5
    output: str = None
    seed: int = 0
    shape: str = "and"
    backend: str = None
    payload_size: int = 1024
    parallel: bool = False

    def __post_init__(self):
        self.counts = tuple(int(c) for c in self.counts)
        if not self.counts or min(self.counts) < 1:
            raise ValueError("attribute counts must be >= 1")
        if self.repetitions < 3:
            raise ValueError("repetitions must be >= 3")
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}")


@dataclass
class BenchRow:
    phase: str
    attrs: int
    median_us: float
    mean_us: float
    stddev_us: float
    elements: int
    samples: list = field(default_factory=list, repr=False)

    def as_csv(self):
        return [self.phase, self.attrs, f"{self.median_us:.1f}", f"{self.mean_us:.1f}",
                f"{self.stddev_us:.1f}", self.elements]


def bench_attributes(n):
    return [f"attr{i:03d}" for i in range(n)]


def bench_policy(attrs, shape="and"):
    """AND-chain, OR-chain, or a balanced tree of 2-of-3 gates."""
    nodes = [Leaf(a) for a in attrs]
    if shape == "and":
        return Gate(len(nodes), tuple(nodes)) if len(nodes) > 1 else nodes[0]
    if shape == "or":
        return Gate(1, tuple(nodes)) if len(nodes) > 1 else nodes[0]
    while len(nodes) > 1:
        grouped = []
        for i in range(0, len(nodes), 3):
            chunk = nodes[i : i + 3]
            grouped.append(chunk[0] if len(chunk) == 1 else Gate(min(2, len(chunk)), tuple(chunk)))
        nodes = grouped
    return nodes[0]


def _time(fn, reps):
    fn()  # warm-up
    samples = []
    for _ in range(reps):
        samples.append(_timed(fn))
    return samples


def _timed(fn):
    # collector off during the call, as timeit does
    was_on = gc.isenabled()
    gc.disable()
    try:
        t0 = time.perf_counter_ns()
        fn()
        return (time.perf_counter_ns() - t0) / 1000.0
    finally:
        if was_on:
            gc.enable()


def prepare_cell(cfg, phase, n):
    """Build the inputs of one cell untimed and run its warm-up call.

    Returns (op, elements): the zero-argument operation to time and the
    structural element count for the row.
    """
    group = PairingGroup(cfg.backend)
    rng = seeded_rng(cfg.seed * 1000 + n)
    pk, mk = cpabe.setup(group, rng)
    attrs = bench_attributes(n)
    tree = bench_policy(attrs, cfg.shape)
    payload = bytes(rng.getrandbits(8) for _ in range(cfg.payload_size))

    if phase == "keygen":

        def op():
            return cpabe.keygen(pk, mk, attrs, BENCH_VALIDITY, rng)

        elements = op().source_element_count
    elif phase == "encrypt":

        def op():
            return cpabe.encrypt(pk, tree, payload, rng, created_at=0)

        elements = op().source_element_count
    elif phase == "decrypt":
        key = cpabe.keygen(pk, mk, attrs, BENCH_VALIDITY, rng)
        rec = cpabe.encrypt(pk, tree, payload, rng, created_at=0)

        def op():
            assert cpabe.decrypt(pk, key, rec, BENCH_DAY) == payload

        group.counter.reset()
        op()
        elements = group.counter.pairings
    else:
        raise ValueError(f"unknown phase {phase!r}")
    return op, elements


def _row(phase, n, samples, elements):
    return BenchRow(
        phase=phase,
        attrs=n,
        median_us=statistics.median(samples),
        mean_us=statistics.fmean(samples),
        stddev_us=statistics.stdev(samples) if len(samples) > 1 else 0.0,
        elements=elements,
        samples=samples,
    )


def run_cell(cfg, phase, n):
    """Time one cell on its own: warm-up, then ``repetitions`` calls."""
    op, elements = prepare_cell(cfg, phase, n)
    samples = [_timed(op) for _ in range(cfg.repetitions)]
    return _row(phase, n, samples, elements)


def _cell(args):
    return run_cell(*args)


def run_bench(cfg, phases=PHASES):
    """Time every (phase, count) cell.

    Sequential runs are interleaved: each repetition round times every cell
    once, so a slow stretch of the host lands on one sample of many cells
    rather than on every sample of one cell. Parallel runs time whole cells
    in worker processes.
    """
    cells = [(cfg, phase, n) for phase in phases for n in cfg.counts]
    if cfg.parallel:
        with ProcessPoolExecutor() as ex:
            rows = list(ex.map(_cell, cells))
    else:
        prepared = [prepare_cell(*c) for c in cells]
        samples = [[] for _ in cells]
        for _ in range(cfg.repetitions):
            for (op, _), acc in zip(prepared, samples):
                acc.append(_timed(op))
        rows = [_row(phase, n, acc, el)
                for (_, phase, n), (_, el), acc in zip(cells, prepared, samples)]
    if cfg.output:
        write_csv(rows, cfg.output)
    return rows


def write_csv(rows, path):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for row in rows:
            w.writerow(row.as_csv())
    return path


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            BenchRow(r["phase"], int(r["attrs"]), float(r["median_us"]), float(r["mean_us"]),
                     float(r["stddev_us"]), int(r["elements"]))
            for r in csv.DictReader(fh)
        ]


def linear_fit(xs, ys):
    """(slope, intercept, R^2) of an ordinary least-squares line."""
    slope, intercept = statistics.linear_regression(xs, ys)
    mean = statistics.fmean(ys)
    ss_tot = sum((y - mean) ** 2 for y in ys)
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    r2 = 1.0 - ss_res / ss_tot if ss_tot else 1.0
    return slope, intercept, r2


def summarize(rows):
    """Per-phase linear fit of median time against attribute count."""
    out = {}
    for phase in PHASES:
        pts = sorted((r.attrs, r.median_us) for r in rows if r.phase == phase)
        if len(pts) >= 2:
            xs, ys = zip(*pts)
            out[phase] = linear_fit(xs, ys)
    return out


def decrypt_within_budget(rows, attrs=25, budget_ms=100.0):
    for r in rows:
        if r.phase == "decrypt" and r.attrs == attrs:
            return r.median_us / 1000.0 <= budget_ms, r.median_us / 1000.0
    return None, None


def compare_backends(repetitions=3, backends=None):
    """Median time of the group primitives on each available backend."""
    backends = backends or available_backends()
    results = []
    for name in backends:
        g = PairingGroup(name)
        rng = seeded_rng(7)
        k = rng.randrange(g.order)
        a, b = g.g1**k, g.g2**k
        t = g.gt
        ops = {
            "pair": lambda: g.pair(a, b),
            "multi_pair_2": lambda: g.multi_pair([(a, b), (a, b)]),
            "g1_exp": lambda: a**k,
            "g2_exp": lambda: b**k,
            "gt_exp": lambda: t**k,
            "hash_to_group": lambda: g.hash_to_group(b"radiography"),
        }
        for op, fn in ops.items():
            samples = _time(fn, repetitions)
            results.append((name, op, statistics.median(samples)))
    return results
