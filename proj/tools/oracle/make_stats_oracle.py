#!/usr/bin/env python3
# Project llm4sd - Copyright 2026 The llm4sd Authors.
# SPDX-License-Identifier: Apache-2.0
"""Reference values for the stats module.

Special functions come from mpmath at 50 digits, test statistics from
scipy.stats. Writes tests/fixtures/stats_oracle.json.
"""

import argparse
import json
import random

import mpmath
from scipy import stats

mpmath.mp.dps = 50


def beta_grid():
    out = []
    for a in (0.5, 1.0, 2.5, 7.0, 30.0, 100.0):
        for b in (0.5, 1.0, 3.0, 12.5, 60.0):
            for x in (0.001, 0.05, 0.3, 0.5, 0.77, 0.95, 0.999):
                v = mpmath.betainc(a, b, 0, x, regularized=True)
                out.append({"a": a, "b": b, "x": x, "value": float(v)})
    return out


def t_sf(t, dof):
    t = mpmath.mpf(t)
    x = dof / (dof + t * t)
    tail = mpmath.betainc(dof / 2.0, 0.5, 0, x, regularized=True) / 2
    return float(tail if t > 0 else 1 - tail)


def t_grid():
    out = []
    for dof in (1, 2, 3, 5, 10, 28, 100, 200):
        for t in (-6.0, -2.5, -1.0, -0.1, 0.0, 0.3, 1.0, 1.96, 2.5, 4.0, 9.0):
            out.append({"t": t, "dof": dof, "value": t_sf(t, dof)})
    return out


def normal_grid():
    out = []
    for z in (-4.0, -1.5, 0.0, 0.5, 1.0, 1.644853627, 1.959963985, 3.0, 5.0, 8.0):
        out.append({"z": z, "value": float(mpmath.ncdf(-z))})
    return out


def slope_fixtures():
    # Closed-form cases: three small designs plus one noise-only set.
    cases = [
        {"name": "three_points", "x": [1, 2, 3], "y": [1, 3, 2]},
        {"name": "five_points", "x": [0, 1, 2, 3, 4], "y": [1.0, 2.9, 5.2, 6.8, 9.1]},
        {"name": "negative_slope", "x": [1, 2, 3, 4, 5, 6], "y": [10, 8, 8.5, 6, 5, 2]},
    ]
    rng = random.Random(7)
    x = [float(i) for i in range(40)]
    y = [rng.gauss(0.0, 1.0) for _ in x]
    cases.append({"name": "y_independent_of_x", "x": x, "y": y})
    for c in cases:
        r = stats.linregress(c["x"], c["y"])
        c["slope"] = float(r.slope)
        c["t"] = float(r.slope / r.stderr)
        c["p"] = float(r.pvalue)
    return cases


def mwu_fixtures():
    rng = random.Random(11)
    cases = [
        {"a": [1, 2, 3], "b": [4, 5, 6]},
        {"a": [1, 2, 2, 3, 5], "b": [2, 3, 3, 4, 6, 7]},
    ]
    for _ in range(30):
        n1 = rng.randint(1, 25)
        n2 = rng.randint(1, 25)
        cases.append({
            "a": [rng.randint(0, 9) for _ in range(n1)],
            "b": [rng.randint(0, 12) for _ in range(n2)],
        })
    for c in cases:
        if len(set(c["a"] + c["b"])) == 1:
            c["u"], c["p"] = len(c["a"]) * len(c["b"]) / 2.0, 1.0
            continue
        r = stats.mannwhitneyu(c["a"], c["b"], alternative="two-sided",
                               use_continuity=True, method="asymptotic")
        c["u"] = float(r.statistic)
        c["p"] = float(r.pvalue)
    return cases


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="tests/fixtures/stats_oracle.json")
    args = ap.parse_args()
    doc = {
        "incomplete_beta": beta_grid(),
        "student_t_sf": t_grid(),
        "normal_sf": normal_grid(),
        "slope_t": slope_fixtures(),
        "mann_whitney": mwu_fixtures(),
    }
    with open(args.out, "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
