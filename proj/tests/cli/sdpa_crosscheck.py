#!/usr/bin/env python3
"""Solve an exported .dat-s with cvxpy and compare against an ncpop result record.

usage: sdpa_crosscheck.py problem.dat-s result.json [tol]
"""
import json
import sys

import cvxpy as cp
import numpy as np


def read_sdpa(path):
    with open(path) as f:
        lines = [l for l in f if l.strip() and l[0] not in '"*']
    tok = lambda l: l.replace(",", " ").replace("{", " ").replace("}", " ").split()
    k = int(tok(lines[0])[0])
    nb = int(tok(lines[1])[0])
    blocks = [int(t) for t in tok(lines[2])[:nb]]
    b = np.array([float(t) for t in tok(lines[3])[:k]])
    mats = [[np.zeros((abs(s), abs(s))) for s in blocks] for _ in range(k + 1)]
    for l in lines[4:]:
        m, blk, i, j, v = l.split()
        m, blk, i, j, v = int(m), int(blk) - 1, int(i) - 1, int(j) - 1, float(v)
        mats[m][blk][i, j] = v
        mats[m][blk][j, i] = v
    return blocks, b, mats


def main():
    sdpa, record = sys.argv[1], sys.argv[2]
    tol = float(sys.argv[3]) if len(sys.argv) > 3 else 1e-6
    blocks, b, mats = read_sdpa(sdpa)
    X = []
    cons = []
    for s in blocks:
        if s > 0:
            v = cp.Variable((s, s), symmetric=True)
            cons.append(v >> 0)
        else:
            d = cp.Variable(-s, nonneg=True)
            v = cp.diag(d)
        X.append(v)
    inner = lambda M: sum(cp.sum(cp.multiply(M[t], X[t])) for t in range(len(blocks)) if np.any(M[t]))
    for j in range(len(b)):
        cons.append(inner(mats[j + 1]) == b[j])
    prob = cp.Problem(cp.Maximize(inner(mats[0])), cons)
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10)
    with open(record) as f:
        rec = json.load(f)
    ours = rec["bound"]
    theirs = prob.value + rec["sdp_offset"]
    diff = abs(ours - theirs)
    print(f"cvxpy/{prob.solver_stats.solver_name} {prob.status}: {theirs:.12f}, ncpop: {ours:.12f}, diff {diff:.2e}")
    ok = prob.status == "optimal" and diff <= tol * (1 + abs(ours))
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
