"""Structural-bias probe.

An optimizer run on an objective that returns fresh uniform noise has
nothing to learn, so its final positions should be uniform in the box.
A Kolmogorov-Smirnov test per coordinate flags optimizers that drift
somewhere on their own, here towards the centre.

Usage: python demos/structural_bias.py [out_dir]
"""

import json
import sys
from pathlib import Path

from fairbench.harness import bias_probe
from fairbench.optimizers import OptimizerConfig


def main(out="demo_out/bias"):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    results = {}
    for name in ("random_search", "center_pull", "de", "shade"):
        rep = bias_probe(OptimizerConfig(algorithm=name), dimension=20, runs=50, budget=2000, master_seed=0)
        results[name] = rep.to_dict()
        print(f"{name:<14} rejected {rep.rejection_fraction:5.0%} of coordinates, "
              f"centre distance {rep.mean_center_distance:.3f} (uniform {rep.uniform_center_distance:.3f}) "
              f"-> {'pass' if rep.passed else 'fail'}")
    (out / "bias.json").write_text(json.dumps(results, indent=2) + "\n")


if __name__ == "__main__":
    main(*sys.argv[1:])
