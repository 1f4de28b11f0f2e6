"""Freeze oracle values used by the tests.

Deliberately independent of the package: angles come from a plain loop over
arccos, class membership from sorting atan2 bearings, rank from numpy SVD.
Writes tests/fixtures/oracles.json.
"""
import itertools
import json
import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "oracles.json"


def angles(p):
    n = len(p)
    out = []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        for j, k in itertools.combinations(others, 2):
            u, v = p[j] - p[i], p[k] - p[i]
            c = u @ v / np.linalg.norm(u) / np.linalg.norm(v)
            out.append(np.arccos(np.clip(c, -1, 1)))
    return np.array(out)


def cycles(p):
    res = []
    for i in range(len(p)):
        others = [j for j in range(len(p)) if j != i]
        d = p[others] - p[i]
        order = [others[t] for t in np.argsort(-np.arctan2(d[:, 1], d[:, 0]))]
        r = order.index(min(order))
        res.append(tuple(order[r:] + order[:r]))
    return res


def mirrored(cyc):
    out = []
    for c in cyc:
        rev = c[::-1]
        r = rev.index(min(rev))
        out.append(rev[r:] + rev[:r])
    return out


def class_null_dimension(n, seed, samples=400):
    rng = np.random.default_rng(seed)
    base = rng.uniform(0, 1, (n, 2))
    ref = cycles(base)
    rows = []
    while len(rows) < samples:
        q = base + rng.normal(0, 0.02, base.shape)
        c = cycles(q)
        if c == ref or c == mirrored(ref):
            rows.append(np.r_[angles(q), -1.0])
    s = np.linalg.svd(np.array(rows), compute_uv=False)
    return int(np.sum(s < 1e-8 * s[0])) + (len(rows[0]) - len(s))


def main():
    null_dims = {}
    for n in range(3, 7):
        dims = {class_null_dimension(n, seed) for seed in range(3)}
        assert len(dims) == 1, dims
        null_dims[str(n)] = dims.pop()
    OUT.write_text(json.dumps({"class_null_dimension": null_dims}, indent=2) + "\n")
    print(null_dims)


if __name__ == "__main__":
    main()
