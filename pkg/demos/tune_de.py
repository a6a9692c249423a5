"""Tuning DE's F and CR by iterated racing.

Candidates are raced on catalog functions; after five instances any
configuration the rank-based workflow finds significantly worse than the
leader is dropped.  New candidates are sampled around the survivors with a
shrinking spread.

Usage: python demos/tune_de.py [out_dir]
"""

import json
import sys
from pathlib import Path

from fairbench.tuner import BUILTIN_TARGETS, ParamSpace, iterated_race


def main(out="demo_out/tune"):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    space = ParamSpace.from_dict({"parameters": [
        {"name": "F", "type": "real", "low": 0.1, "high": 1.0},
        {"name": "CR", "type": "real", "low": 0.0, "high": 1.0},
    ]})
    evaluate, instances = BUILTIN_TARGETS["de"]
    best, audit = iterated_race(space, evaluate, total_budget=1500, seed=5, instances=instances)

    for rnd in audit["rounds"]:
        race = rnd["race"]
        print(f"round {rnd['round']}: {len(rnd['candidates'])} candidates, "
              f"{len(race['eliminations'])} eliminated, leader {rnd['best']}")
    print("winner:", json.dumps(best.assignment))
    (out / "tune.json").write_text(json.dumps({"winner": best.to_dict(), "audit": audit}, indent=2) + "\n")


if __name__ == "__main__":
    main(*sys.argv[1:])
