"""Regenerate ``tests/data/frozen.json`` from the dense reference.

Run from the repository root: ``python tests/make_frozen.py``.
"""

import json
from pathlib import Path

import numpy as np

import reference as ref

CASES = []


def vectors(seed, schedule, m, n):
    rng = np.random.default_rng(1000 + seed)
    out = []
    for side in schedule:
        out.append(rng.standard_normal(n if side == "right" else m))
    return out


def main():
    out = {"ginibre": [], "haar": []}
    sched_g = ["right", "left", "right", "right", "left", "left"]
    for seed in range(3):
        m, n, sigma = 7, 6, 0.5
        xs = vectors(seed, sched_g, m, n)
        ys = ref.ginibre_probes(m, n, sigma, seed, 5, sched_g, xs)
        out["ginibre"].append({"m": m, "n": n, "sigma": sigma, "seed": seed, "stream": 5,
                               "schedule": sched_g, "x": [x.tolist() for x in xs],
                               "y": [y.tolist() for y in ys]})
    sched_h = ["right", "left", "left", "right", "right"]
    for seed in range(3):
        n = 6
        xs = vectors(seed, sched_h, n, n)
        ys = ref.haar_probes(n, seed, 5, sched_h, xs)
        out["haar"].append({"n": n, "seed": seed, "stream": 5, "schedule": sched_h,
                            "x": [x.tolist() for x in xs], "y": [y.tolist() for y in ys]})
    path = Path(__file__).parent / "data" / "frozen.json"
    path.write_text(json.dumps(out, indent=1) + "\n")


if __name__ == "__main__":
    main()
