"""Benchmark table at the default desk-scale size.

    python3 scripts/run_bench.py               # n=1000, p=2000
    python3 scripts/run_bench.py --quick       # n=200, p=400, 3 repetitions

Extra arguments are passed to ``domescreen bench``.
"""

import sys

from domescreen.cli import main

if __name__ == "__main__":
    args = sys.argv[1:]
    if "--quick" in args:
        args.remove("--quick")
        base = ["--n", "200", "--p", "400", "--reps", "3"]
    else:
        base = ["--n", "1000", "--p", "2000"]
    sys.exit(main(["bench"] + base + args))
