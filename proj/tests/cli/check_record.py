#!/usr/bin/env python3
"""Run an ncpop command and check its exit code and JSON record.

usage: check_record.py [--exit N] [--check EXPR]... [--stderr TEXT] -- command args...

Each EXPR is evaluated with `r` bound to the parsed JSON record (stdout).
"""
import argparse
import json
import math
import subprocess
import sys


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--exit", type=int, default=0)
    ap.add_argument("--check", action="append", default=[])
    ap.add_argument("--stderr", help="text expected on stderr")
    ap.add_argument("--no-json", action="store_true")
    ap.add_argument("cmd", nargs=argparse.REMAINDER)
    a = ap.parse_args()
    cmd = a.cmd[1:] if a.cmd and a.cmd[0] == "--" else a.cmd
    p = subprocess.run(cmd, capture_output=True, text=True)
    sys.stderr.write(p.stderr)
    failed = []
    if p.returncode != a.exit:
        failed.append(f"exit code {p.returncode}, expected {a.exit}")
    if a.stderr is not None and a.stderr not in p.stderr:
        failed.append(f"stderr lacks {a.stderr!r}")
    if not a.no_json and a.exit != 1:
        try:
            r = json.loads(p.stdout)
        except json.JSONDecodeError as e:
            failed.append(f"stdout is not JSON: {e}")
            r = None
        for expr in a.check:
            if r is None or not eval(expr, {"math": math}, {"r": r}):
                failed.append(f"check failed: {expr}")
    for f in failed:
        print("FAIL:", f)
    if failed:
        print(p.stdout[:2000])
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
