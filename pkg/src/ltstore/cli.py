"""Command-line interface.

State lives in a directory (``--state-dir``) written by ``init`` and updated
by every command that changes the system. Exit status: 0 on success or
acceptance, 1 when verification or a check rejects, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from typing import Optional, Sequence

from .crypto import TrustAnchor
from .crypto.instances import DAYS_PER_YEAR
from .evidence import decode_block, encode_block, verify_report
from .parties.config import ConfigError, SystemConfig, load_config
from .parties.system import System

EXIT_OK, EXIT_REJECT, EXIT_USAGE = 0, 1, 2
DEFAULT_STATE_DIR = "ltstore-state"


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ output

def emit(rows: list[dict], fmt: str, stream=None) -> None:
    stream = stream or sys.stdout
    if fmt == "json":
        stream.write(json.dumps(rows if len(rows) != 1 else rows[0], indent=2, sort_keys=True) + "\n")
        return
    if not rows:
        return
    w = csv.DictWriter(stream, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


def _write_out(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# ------------------------------------------------------------------ state

def _config(args) -> SystemConfig:
    try:
        cfg = load_config(args.config)
    except (OSError, ConfigError, ValueError) as exc:
        raise UsageError(f"cannot load config: {exc}") from exc
    if args.seed is not None:
        cfg = cfg.with_(seed=args.seed)
    return cfg


def _load(args) -> System:
    if not os.path.isfile(os.path.join(args.state_dir, "config.json")):
        raise UsageError(f"no state in {args.state_dir!r}; run 'init' first")
    return System.load(args.state_dir)


def _check_id(sysm: System, block_id: int) -> None:
    if not (1 <= block_id <= sysm.cfg.N):
        raise UsageError(f"id {block_id} outside 1..{sysm.cfg.N}")


# ------------------------------------------------------------------ commands

def cmd_init(args) -> int:
    cfg = _config(args)
    if os.path.exists(os.path.join(args.state_dir, "config.json")) and not args.force:
        raise UsageError(f"{args.state_dir!r} already holds a system (use --force to replace it)")
    sysm = System.create(cfg)
    sysm.save(args.state_dir)
    emit([{"state_dir": args.state_dir, "N": cfg.N, "M": sysm.M, "L": cfg.block_size_L,
           "seed": cfg.seed}], args.out)
    return EXIT_OK


def cmd_write(args) -> int:
    sysm = _load(args)
    _check_id(sysm, args.id)
    with open(args.file, "rb") as fh:
        dat = fh.read()
    if len(dat) > sysm.cfg.block_size_L:
        raise UsageError(f"{args.file}: {len(dat)} bytes exceeds block size {sysm.cfg.block_size_L}")
    sysm.write(args.id, dat)
    sysm.save(args.state_dir)
    emit([{"op": "write", "id": args.id, "bytes": len(dat), "day": sysm.clock.now}], args.out)
    return EXIT_OK


def cmd_read(args) -> int:
    sysm = _load(args)
    _check_id(sysm, args.id)
    dat, E = sysm.read(args.id)
    sysm.save(args.state_dir)
    if args.output in (None, "-"):
        sys.stdout.buffer.write(dat)
        sys.stdout.flush()
    else:
        with open(args.output, "wb") as fh:
            fh.write(dat)
    t = E[0].ts.t
    if args.evidence:
        with open(args.evidence, "wb") as fh:
            fh.write(encode_block(E))
    if args.output not in (None, "-"):
        emit([{"op": "read", "id": args.id, "bytes": len(dat), "time": t, "entries": len(E)}],
             args.out)
    return EXIT_OK


def _renewal(kind: str):
    def run(args) -> int:
        sysm = _load(args)
        getattr(sysm, kind)()
        sysm.save(args.state_dir)
        emit([{"op": kind, "day": sysm.clock.now}], args.out)
        return EXIT_OK
    return run


def cmd_advance(args) -> int:
    sysm = _load(args)
    if args.to_day is not None:
        target = args.to_day
    else:
        target = sysm.clock.now + round(args.years * DAYS_PER_YEAR)
    if target <= sysm.clock.now:
        raise UsageError(f"target day {target} is not after the current day {sysm.clock.now}")
    events = sysm.advance(target)
    sysm.save(args.state_dir)
    emit([{"day": e.day, "year": e.year, "event": e.kind} for e in events]
         or [{"day": target, "year": "", "event": ""}], args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    ta_path = args.ta or os.path.join(args.state_dir, "trust_anchor.json")
    try:
        with open(ta_path) as fh:
            ta = TrustAnchor.loads(fh.read())
        with open(args.data, "rb") as fh:
            dat = fh.read()
        with open(args.evidence, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    t_ver = args.at
    if t_ver is None:
        meta = os.path.join(args.state_dir, "system.json")
        if not os.path.isfile(meta):
            raise UsageError("--at is required without a state directory")
        with open(meta) as fh:
            t_ver = int(json.load(fh)["now"])
    try:
        E = decode_block(raw)
    except ValueError as exc:
        emit([{"accepted": False, "index": "", "reason": f"malformed evidence: {exc}"}], args.out)
        return EXIT_REJECT
    rep = verify_report(ta, dat, args.time, E, t_ver)
    emit([{"accepted": rep.ok, "index": "" if rep.index is None else rep.index,
           "reason": rep.reason, "entries": len(E), "t_ver": t_ver}], args.out)
    return EXIT_OK if rep.ok else EXIT_REJECT


def cmd_simulate(args) -> int:
    from .harness.costs import random_workload, simulate_schedule

    cfg = _config(args)
    if args.horizon is not None:
        cfg = cfg.with_(horizon_years=args.horizon)
    wl = random_workload(args.accesses_per_year) if args.accesses_per_year else None
    verify_years = range(0, cfg.horizon_years + 1, 10) if args.verify else ()
    rep = simulate_schedule(cfg, probe=args.probe, workload=wl, verify_years=verify_years)
    text = rep.to_json() + "\n" if args.out == "json" else rep.to_csv()
    _write_out(args.output, text)
    bad = [y for y, (ok, total) in rep.verifications.items() if ok != total]
    return EXIT_REJECT if bad else EXIT_OK


def cmd_aph(args) -> int:
    from .harness import aph

    rows = []
    if args.game == "oram":
        names = list(aph.ORAM_DISTINGUISHERS) if args.distinguisher == "all" else [args.distinguisher]
        for name in names:
            if name not in aph.ORAM_DISTINGUISHERS:
                raise UsageError(f"unknown ORAM distinguisher {name!r}")
            r = aph.run_oram_aph(args.N, aph.ORAM_DISTINGUISHERS[name], args.trials, args.seed or 0,
                                 identity=args.identity)
            rows.append(_aph_row(r, args))
    else:
        names = list(aph.SYSTEM_DISTINGUISHERS) if args.distinguisher == "all" else [args.distinguisher]
        corrupted = [int(x) for x in args.corrupted.split(",") if x] if args.corrupted else [1]
        for name in names:
            if name not in aph.SYSTEM_DISTINGUISHERS:
                raise UsageError(f"unknown system distinguisher {name!r}")
            try:
                r = aph.run_system_aph(aph.SYSTEM_DISTINGUISHERS[name], args.trials,
                                       corrupted=corrupted, seed=args.seed or 0,
                                       refresh=not args.no_refresh,
                                       allow_threshold_violation=args.allow_threshold_violation)
            except ValueError as exc:
                raise UsageError(str(exc)) from exc
            rows.append(_aph_row(r, args))
    emit(rows, args.out)
    return EXIT_OK if all(r["within_band"] for r in rows) else EXIT_REJECT


def _aph_row(r, args) -> dict:
    return {"experiment": r.name, "trials": r.trials, "successes": r.successes,
            "rate": round(r.rate, 6), "within_band": r.within(args.lo, args.hi)}


def cmd_fuzz(args) -> int:
    from .harness.fuzz import build_corpus, integrity_fuzz

    if os.path.isfile(os.path.join(args.state_dir, "config.json")):
        sysm = System.load(args.state_dir)
        corpus = [(dat, E[0].ts.t, E) for _, dat, E in sysm.audit_blocks()]
        ta, t_ver = sysm.ta, sysm.clock.now
    else:
        corpus, ta, t_ver = build_corpus(seed=args.seed or 0)
    rep = integrity_fuzz(corpus, ta, t_ver, args.per_class, seed=args.seed or 0)
    rows = rep.rows() + [{"mutation": "identity", "trials": rep.corpus_size,
                          "accepted": rep.identity_accepted, "skipped": 0}]
    emit(rows, args.out)
    ok = rep.total_accepted == 0 and rep.identity_accepted == rep.corpus_size
    return EXIT_OK if ok else EXIT_REJECT


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS,
                        help="preset name or path to a JSON config")
    common.add_argument("--state-dir", default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out", choices=("csv", "json"), default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="ltstore", parents=[common],
                                description="Long-term confidential storage with integrity evidence.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("init", parents=[common], help="create a new system")
    s.add_argument("--force", action="store_true")
    s.set_defaults(func=cmd_init)

    s = sub.add_parser("write", parents=[common], help="write a file into block ID")
    s.add_argument("id", type=int)
    s.add_argument("file")
    s.set_defaults(func=cmd_write)

    s = sub.add_parser("read", parents=[common], help="read block ID")
    s.add_argument("id", type=int)
    s.add_argument("-o", "--output", help="data output file (default stdout)")
    s.add_argument("--evidence", help="write the encoded evidence chain here")
    s.set_defaults(func=cmd_read)

    for name, kind in (("renew-ts", "renew_ts"), ("renew-com", "renew_com"), ("reshare", "reshare")):
        s = sub.add_parser(name, parents=[common], help=f"run {name} now")
        s.set_defaults(func=_renewal(kind))

    s = sub.add_parser("advance", parents=[common], help="move the clock, running due renewals")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--years", type=float)
    g.add_argument("--to-day", type=int)
    s.set_defaults(func=cmd_advance)

    s = sub.add_parser("verify", parents=[common], help="check data against an evidence chain")
    s.add_argument("--data", required=True)
    s.add_argument("--time", type=int, required=True, help="claimed storage day")
    s.add_argument("--evidence", required=True)
    s.add_argument("--ta", help="trust anchor JSON (default: the state directory's)")
    s.add_argument("--at", type=int, help="verification day (default: the state's clock)")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", parents=[common], help="run the cost simulation")
    s.add_argument("--horizon", type=int)
    s.add_argument("--probe", action="store_true", help="one probe Read per year")
    s.add_argument("--accesses-per-year", type=int, default=0)
    s.add_argument("--verify", action="store_true", help="verify every block each decade")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("aph-test", parents=[common], help="access-pattern hiding experiments")
    s.add_argument("--game", choices=("oram", "system"), default="oram")
    s.add_argument("--distinguisher", default="all")
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--N", type=int, default=16)
    s.add_argument("--identity", action="store_true", help="broken identity-ORAM control")
    s.add_argument("--no-refresh", action="store_true", help="commitment-refresh-disabled control")
    s.add_argument("--corrupted", help="comma-separated shareholder indices (default 1)")
    s.add_argument("--allow-threshold-violation", action="store_true")
    s.add_argument("--lo", type=float, default=0.45)
    s.add_argument("--hi", type=float, default=0.55)
    s.set_defaults(func=cmd_aph)

    s = sub.add_parser("fuzz", parents=[common], help="integrity mutation fuzzing")
    s.add_argument("--per-class", type=int, default=500)
    s.set_defaults(func=cmd_fuzz)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    for name, default in (("config", None), ("state_dir", DEFAULT_STATE_DIR), ("seed", None),
                          ("out", "csv")):
        if not hasattr(args, name):
            setattr(args, name, default)
    if getattr(args, "trials", 1) < 1:
        print("ltstore: error: --trials must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ltstore: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"ltstore: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
