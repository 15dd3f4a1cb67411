#!/usr/bin/env python3
"""Desk-scale training smoke: two learners on a two-center chain.

Trains the smoke_train preset (5e5 steps), saves a checkpoint and curves
under out/smoke_train_train/, then evaluates the frozen policies.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from supplysim.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main(["train", "smoke_train"] + sys.argv[1:]))
