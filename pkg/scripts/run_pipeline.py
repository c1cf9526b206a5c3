#!/usr/bin/env python3
"""End-to-end demo: simulate a cohort, train, evaluate all feature
families, produce one user's ranges, and validate containment.

Usage: python scripts/run_pipeline.py [OUT_DIR] [SEED]
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from congrec.cli import main  # noqa: E402


def run(out_dir="runs/demo", seed="42") -> int:
    root = Path(out_dir)
    data, model = root / "data", root / "model"
    steps = [
        ["simulate", "--out", str(data), "--seed", seed],
        ["train", "--data", str(data), "--features", "congruence", "--out", str(model)],
        ["evaluate", "--data", str(data), "--features", "all", "--out", str(root / "eval"), "--seed", seed],
        [
            "recommend", "--data", str(data), "--model", str(model / "model.json"),
            "--user", "u0000", "--out", str(root / "rec"), "--m", "8",
        ],
        [
            "validate", "--data", str(data), "--model", str(model / "model.json"),
            "--out", str(root / "val"), "--m", "8",
        ],
    ]
    for argv in steps:
        print(f"$ congrec {' '.join(argv)}")
        code = main(argv)
        if code != 0:
            return code
    print(f"\nall outputs under {root}/")
    return 0


if __name__ == "__main__":
    args = sys.argv[1:]
    sys.exit(run(*args[:2]))
