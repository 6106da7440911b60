"""Regenerate the regression fixtures in tests/fixtures.

Each seed gets a small synthetic dictionary and target (text format) and the
CSV written by ``screen`` on them. A fixture is only written after ``verify``
passes on it.
"""

import os
import sys

from domescreen.cli import main

ROOT = os.path.normpath(os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures"))
SEEDS = (1, 2, 3)
SHAPE = ["--n", "20", "--p", "60", "--fmt", "text"]
RUN = ["--lambda-ratio", "0.5", "--m", "2"]


def build(seed):
    out = os.path.join(ROOT, f"seed{seed}")
    assert main(["gen", "--seed", str(seed), "--out", out] + SHAPE) == 0
    data = ["--dict", os.path.join(out, "dict.txt"), "--target", os.path.join(out, "target.txt")]
    code = main(["verify"] + data + RUN + ["--out", os.path.join(out, "verify.txt")])
    if code != 0:
        sys.exit(f"seed {seed}: verify exited with {code}")
    os.remove(os.path.join(out, "verify.txt"))
    assert main(["screen"] + data + RUN + ["--out", os.path.join(out, "screen.csv")]) == 0


if __name__ == "__main__":
    for seed in SEEDS:
        build(seed)
        print(f"fixture seed{seed} written")
