from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from ltstore.cli import main


@pytest.fixture
def state(tmp_path, capsys):
    sd = str(tmp_path / "state")
    assert main(["init", "--config", "tiny", "--state-dir", sd, "--seed", "5"]) == 0
    capsys.readouterr()
    return tmp_path, sd


def run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_write_read_verify_roundtrip(state, capsys):
    tmp, sd = state
    (tmp / "in.bin").write_bytes(b"archived bytes")
    assert run(capsys, "write", "3", str(tmp / "in.bin"), "--state-dir", sd)[0] == 0
    rc, out, _ = run(capsys, "read", "3", "-o", str(tmp / "out.bin"), "--evidence", str(tmp / "ev.bin"),
                     "--state-dir", sd)
    assert rc == 0 and (tmp / "out.bin").read_bytes() == b"archived bytes"
    t = rows(out)[0]["time"]
    rc, out, _ = run(capsys, "--state-dir", sd, "verify", "--data", str(tmp / "out.bin"), "--time", t,
                     "--evidence", str(tmp / "ev.bin"))
    assert rc == 0 and rows(out)[0]["accepted"] == "True"


def test_read_to_stdout(state, capsys):
    tmp, sd = state
    (tmp / "in.bin").write_bytes(b"hello")
    run(capsys, "write", "1", str(tmp / "in.bin"), "--state-dir", sd)
    rc, out, _ = run(capsys, "read", "1", "--state-dir", sd)
    assert rc == 0 and out == "hello"


def test_verify_rejects_tampering(state, capsys):
    tmp, sd = state
    (tmp / "in.bin").write_bytes(b"original")
    run(capsys, "write", "2", str(tmp / "in.bin"), "--state-dir", sd)
    run(capsys, "read", "2", "-o", str(tmp / "out.bin"), "--evidence", str(tmp / "ev.bin"), "--state-dir", sd)
    (tmp / "bad.bin").write_bytes(b"0riginal")
    rc, out, _ = run(capsys, "verify", "--data", str(tmp / "bad.bin"), "--time", "0",
                     "--evidence", str(tmp / "ev.bin"), "--state-dir", sd, "--out", "json")
    assert rc == 1 and json.loads(out)["accepted"] is False
    ev = bytearray((tmp / "ev.bin").read_bytes())
    ev[-5] ^= 1
    (tmp / "ev2.bin").write_bytes(bytes(ev))
    rc, _, _ = run(capsys, "verify", "--data", str(tmp / "out.bin"), "--time", "0",
                   "--evidence", str(tmp / "ev2.bin"), "--state-dir", sd)
    assert rc == 1
    (tmp / "junk.bin").write_bytes(b"\x01\x02")
    rc, out, _ = run(capsys, "verify", "--data", str(tmp / "out.bin"), "--time", "0",
                     "--evidence", str(tmp / "junk.bin"), "--state-dir", sd)
    assert rc == 1 and "malformed" in out


def test_advance_and_renewals(state, capsys):
    _, sd = state
    rc, out, _ = run(capsys, "advance", "--years", "10", "--state-dir", sd)
    assert rc == 0 and [r["event"] for r in rows(out)] == ["ReTs"] * 4 + ["ReCom"]
    for cmd in ("renew-ts", "renew-com", "reshare"):
        assert run(capsys, cmd, "--state-dir", sd)[0] == 0
    assert run(capsys, "advance", "--to-day", "5", "--state-dir", sd)[0] == 2


def test_usage_errors(state, capsys):
    tmp, sd = state
    assert run(capsys, "read", "99", "--state-dir", sd)[0] == 2
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys, "read", "1", "--state-dir", str(tmp / "missing"))[0] == 2
    assert run(capsys, "init", "--state-dir", sd)[0] == 2  # exists, no --force
    assert run(capsys, "write", "1", str(tmp / "nope.bin"), "--state-dir", sd)[0] == 2
    assert run(capsys, "aph-test", "--game", "system", "--corrupted", "1,2", "--trials", "1")[0] == 2
    assert run(capsys, "aph-test", "--distinguisher", "nope", "--trials", "1")[0] == 2
    assert run(capsys, "init", "--config", "no-such-preset", "--state-dir", str(tmp / "x"))[0] == 2


def test_simulate_emits_one_row_per_year(tmp_path, capsys):
    out = tmp_path / "sim.csv"
    rc, _, _ = run(capsys, "simulate", "--config", "tiny", "--horizon", "6", "--probe", "--verify",
                   "-o", str(out))
    got = rows(out.read_text())
    assert rc == 0 and [r["year"] for r in got] == [str(y) for y in range(1, 7)]


def test_aph_and_fuzz_commands(state, capsys):
    _, sd = state
    rc, out, _ = run(capsys, "aph-test", "--game", "oram", "--identity", "--trials", "30",
                     "--distinguisher", "path-equality")
    assert rc == 1 and rows(out)[0]["within_band"] == "False"  # the broken control is caught
    rc, out, _ = run(capsys, "fuzz", "--per-class", "5", "--state-dir", sd)
    assert rc == 0
    assert {r["mutation"] for r in rows(out)} >= {"flip_dat", "identity"}


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ltstore.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "simulate" in proc.stdout
