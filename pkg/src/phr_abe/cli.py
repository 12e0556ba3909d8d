"""Command-line interface.

Exit codes: 0 ok, 1 usage or I/O error, 2 cryptographic failure (bad
signature, envelope authentication, malformed key or record), 3 policy not
satisfied, 4 key expired. ``--json`` switches stdout to JSON.
"""

import argparse
import datetime as dt
import json
import logging
import sys
from pathlib import Path

from . import __version__, actors, bench, cpabe
from .errors import (
    DecryptionError,
    KeyExpiredError,
    MalformedError,
    PolicySyntaxError,
    PolicyUnsatisfiedError,
)
from .pairing import PairingGroup, default_rng, seeded_rng
from .timeval import ValiditySet

EXIT_OK, EXIT_USAGE, EXIT_CRYPTO, EXIT_POLICY, EXIT_EXPIRED = 0, 1, 2, 3, 4

log = logging.getLogger("phr_abe")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path):
    if path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _write(path, data):
    if path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        Path(path).write_bytes(data)


def _rng(args):
    return seeded_rng(args.seed) if getattr(args, "seed", None) is not None else default_rng()


def _date(text):
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ISO date: {text!r}") from None


def _validity(specs):
    spans = []
    for spec in specs:
        for part in spec.split(","):
            part = part.strip()
            if not part:
                continue
            if ".." in part:
                a, b = part.split("..", 1)
                spans.append((_date(a), _date(b)))
            else:
                spans.append(_date(part))
    if not spans:
        raise UsageError("--valid needs at least one day or range")
    return ValiditySet.cover(spans)


def _attrs(specs):
    out = [a.strip() for spec in specs for a in spec.split(",") if a.strip()]
    if not out:
        raise UsageError("--attrs needs at least one attribute")
    return out


def _load_pk(args):
    return cpabe.PublicParams.from_bytes(_read(args.pk), backend=getattr(args, "backend", None))


def _emit(args, obj, text=None):
    if args.json:
        print(json.dumps(obj, sort_keys=True))
    elif text is not None:
        print(text)


def cmd_setup(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    pk, mk = cpabe.setup(PairingGroup(args.backend), _rng(args))
    (out / "pk.bin").write_bytes(pk.to_bytes())
    (out / "mk.bin").write_bytes(mk.to_bytes())
    _emit(args, {"pk": str(out / "pk.bin"), "mk": str(out / "mk.bin")},
          f"wrote {out / 'pk.bin'} and {out / 'mk.bin'}")


def cmd_keygen(args):
    pk = _load_pk(args)
    mk = cpabe.MasterKey.from_bytes(_read(args.mk), pk.group)
    key = cpabe.keygen(pk, mk, _attrs(args.attrs), _validity(args.valid), _rng(args))
    _write(args.out, key.to_bytes())
    _emit(args, {"key_id": key.key_id, "attributes": sorted(key.attributes),
                 "validity": str(key.validity)},
          f"key {key.key_id}: {len(key.components)} attributes, valid {key.validity}")


def cmd_encrypt(args):
    pk = _load_pk(args)
    rec = cpabe.encrypt(pk, args.policy, _read(args.input), _rng(args), owner_id=args.owner)
    data = rec.to_bytes()
    _write(args.out, data)
    if args.out != "-":
        _emit(args, {"record_id": actors.record_id(data), "bytes": len(data)},
              f"sealed {len(data)} bytes, id {actors.record_id(data)}")


def _today(args):
    return args.date or dt.date.today()


def cmd_decrypt(args):
    pk = _load_pk(args)
    key = cpabe.AttributeKey.from_bytes(_read(args.key), pk.group)
    out = cpabe.decrypt(pk, key, _read(args.input), _today(args))
    _write(args.out, out)


def _store(args, pk):
    return actors.RecordStore(pk.group, args.store)


def cmd_publish(args):
    pk = _load_pk(args)
    store = _store(args, pk)
    rid = actors.owner_publish(store, pk, args.policy, _read(args.input), args.owner, _rng(args))
    _emit(args, {"record_id": rid}, rid)


def cmd_fetch(args):
    pk = _load_pk(args)
    key = cpabe.AttributeKey.from_bytes(_read(args.key), pk.group)
    store = _store(args, pk)
    try:
        out = actors.user_fetch_decrypt(store, args.id, key, _today(args), pk)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    _write(args.out, out)


def cmd_delegate(args):
    pk = _load_pk(args)
    key = cpabe.AttributeKey.from_bytes(_read(args.fog_key), pk.group)
    store = _store(args, pk)
    fog = actors.FogNode(args.fog_id, pk, key)
    session = actors.Session(args.user, args.session)
    try:
        out = actors.fog_delegate_decrypt(fog, store, args.id, session, _today(args))
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    finally:
        for entry in fog.work_log:
            log.info("delegation %s session=%s %.0f us %s", entry.record_id[:12],
                     entry.session_id, entry.elapsed_us, entry.outcome)
    _write(args.out, out)
    if args.out != "-":
        entry = fog.work_log[-1]
        _emit(args, {"record_id": args.id, "session": args.session,
                     "elapsed_us": round(entry.elapsed_us, 1), "bytes": len(out)})


def cmd_sizes(args):
    group = PairingGroup(args.backend)
    reports = []
    if args.pk:
        reports.append(cpabe.size_report(cpabe.PublicParams.from_bytes(_read(args.pk), args.backend)))
    if args.key:
        reports.append(cpabe.size_report(cpabe.AttributeKey.from_bytes(_read(args.key), group)))
    if args.record:
        reports.append(cpabe.size_report(cpabe.SealedRecord.from_bytes(_read(args.record), group)))
    if not reports:
        raise UsageError("sizes needs --pk, --key or --record")
    if args.json:
        print(json.dumps([r.as_dict() for r in reports], sort_keys=True))
        return
    for r in reports:
        print(f"{r.kind}: {r.source_elements} source elements "
              f"({r.count('G1')} G1, {r.count('G2')} G2), {r.target_elements} target, "
              f"{r.scalars} scalars, {r.aux_bytes} aux bytes, {r.total_bytes} bytes total")
        for note in r.notes:
            print(f"  note: {note}")


def cmd_bench(args):
    if args.compare_backends:
        res = bench.compare_backends(args.reps)
        if args.json:
            print(json.dumps([{"backend": b, "op": o, "median_us": round(t, 1)} for b, o, t in res]))
        else:
            for b, o, t in res:
                print(f"{b:8s} {o:14s} {t:12.1f} us")
        return
    counts = [int(c) for c in args.counts.split(",")] if args.counts else list(range(5, 41, 5))
    try:
        cfg = bench.BenchConfig(counts=counts, repetitions=args.reps, output=args.out,
                                seed=args.seed or 0, shape=args.shape, backend=args.backend,
                                parallel=args.parallel)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = bench.run_bench(cfg)
    fits = bench.summarize(rows)
    ok, ms = bench.decrypt_within_budget(rows, args.at, args.budget_ms)
    if args.json:
        print(json.dumps({
            "rows": [dict(zip(bench.HEADER, r.as_csv())) for r in rows],
            "fits": {p: {"slope_us": s, "intercept_us": i, "r2": r2} for p, (s, i, r2) in fits.items()},
            "decrypt_budget": {"attrs": args.at, "budget_ms": args.budget_ms, "median_ms": ms, "ok": ok},
        }))
        return
    for r in rows:
        print(f"{r.phase:8s} {r.attrs:3d} attrs  median {r.median_us / 1000:8.2f} ms  "
              f"(mean {r.mean_us / 1000:.2f}, sd {r.stddev_us / 1000:.2f})  elements {r.elements}")
    for p, (s, i, r2) in fits.items():
        print(f"{p}: {s / 1000:.3f} ms/attr, R^2 = {r2:.4f}")
    if ok is not None:
        print(f"decrypt at {args.at} attrs: {ms:.1f} ms (budget {args.budget_ms} ms) "
              f"{'ok' if ok else 'OVER BUDGET'}")
    if args.out:
        print(f"results written to {args.out}")


def build_parser():
    p = _Parser(prog="phr-abe", description="Fog-assisted PHR sharing over CP-ABE.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--backend", choices=["native", "python"], default=None,
                   help="group arithmetic backend (default: native if built)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("setup", help="generate public parameters and master key")
    s.add_argument("--out", required=True, help="directory for pk.bin and mk.bin")
    s.add_argument("--seed", type=int, help="deterministic RNG (testing only)")
    s.set_defaults(func=cmd_setup)

    s = sub.add_parser("keygen", help="issue an attribute key")
    s.add_argument("--pk", required=True)
    s.add_argument("--mk", required=True)
    s.add_argument("--attrs", action="append", required=True, help="comma-separated, repeatable")
    s.add_argument("--valid", action="append", required=True,
                   help="YYYY-MM-DD or YYYY-MM-DD..YYYY-MM-DD, comma-separated, repeatable")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_keygen)

    s = sub.add_parser("encrypt", help="seal a payload under a policy")
    s.add_argument("--pk", required=True)
    s.add_argument("--policy", required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--owner", default="")
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_encrypt)

    s = sub.add_parser("decrypt", help="open a sealed record")
    s.add_argument("--pk", required=True)
    s.add_argument("--key", required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--date", type=_date, help="access date (default: today)")
    s.set_defaults(func=cmd_decrypt)

    s = sub.add_parser("publish", help="encrypt and store a record")
    s.add_argument("--pk", required=True)
    s.add_argument("--store", required=True)
    s.add_argument("--policy", required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--owner", default="")
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_publish)

    s = sub.add_parser("fetch", help="fetch a record and decrypt it directly")
    s.add_argument("--pk", required=True)
    s.add_argument("--store", required=True)
    s.add_argument("--id", required=True)
    s.add_argument("--key", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--date", type=_date)
    s.set_defaults(func=cmd_fetch)

    s = sub.add_parser("delegate", help="decrypt a stored record through a fog node")
    s.add_argument("--pk", required=True)
    s.add_argument("--store", required=True)
    s.add_argument("--id", required=True)
    s.add_argument("--fog-key", required=True)
    s.add_argument("--fog-id", default="fog")
    s.add_argument("--user", default="user")
    s.add_argument("--session", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--date", type=_date)
    s.set_defaults(func=cmd_delegate)

    s = sub.add_parser("sizes", help="element and byte counts")
    s.add_argument("--pk")
    s.add_argument("--key")
    s.add_argument("--record")
    s.set_defaults(func=cmd_sizes)

    s = sub.add_parser("bench", help="attribute-count sweep")
    s.add_argument("--counts", help="comma-separated attribute counts (default 5..40 step 5)")
    s.add_argument("--reps", type=int, default=5)
    s.add_argument("--out", help="CSV results file")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--shape", choices=bench.SHAPES, default="and")
    s.add_argument("--budget-ms", type=float, default=100.0)
    s.add_argument("--at", type=int, default=25, help="attribute count for the decrypt budget")
    s.add_argument("--parallel", action="store_true")
    s.add_argument("--compare-backends", action="store_true",
                   help="time group primitives on every available backend")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except KeyExpiredError as exc:
        print(f"phr-abe: key expired: {exc}", file=sys.stderr)
        return EXIT_EXPIRED
    except PolicyUnsatisfiedError as exc:
        print(f"phr-abe: access denied: {exc}", file=sys.stderr)
        return EXIT_POLICY
    except (DecryptionError, MalformedError) as exc:
        print(f"phr-abe: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CRYPTO
    except (UsageError, PolicySyntaxError, argparse.ArgumentTypeError) as exc:
        print(f"phr-abe: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"phr-abe: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
