#!/usr/bin/env python3
"""Run every scripted mechanism-intervention experiment and summarize.

Covers the baseline circular chain, the self-repair speed sweep, the
linear inter-center distance sweep, and the three branch/merge topologies.
Artifacts land under out/ (one directory per experiment).
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from supplysim.cli import main  # noqa: E402

EXPERIMENTS = [
    ("run", "baseline_circular"),
    ("run", "selfish_circular"),
    ("run", "carer_circular"),
    ("run", "repair_time_sweep"),
    ("run", "linear_distance_sweep"),
    ("run", "env1"),
    ("run", "env2"),
    ("run", "env3"),
]

if __name__ == "__main__":
    workers = sys.argv[1] if len(sys.argv) > 1 else "2"
    for cmd, preset in EXPERIMENTS:
        print(f"=== {preset} ===")
        rc = main([cmd, preset, "--workers", workers, "--no-logs"])
        if rc != 0:
            sys.exit(rc)
    print("all intervention experiments done; see out/")
