"""Rejection fraction against m for several target models.

Prints, for each model, the mean rejection fraction at each m and the share
of instances where going from one half-space to two rejects strictly more
features.

    python3 scripts/rejection_trend.py --instances 20 --ratio 0.4
"""

import argparse

import numpy as np

from domescreen import synthetic
from domescreen.screening import screen

MS = (0, 1, 2, 3, 5)


def run(model, atoms, ratio, instances, n, p):
    spec = synthetic.SyntheticSpec(n=n, p=p, target_model=model, atoms=atoms)
    table = np.zeros((instances, len(MS)))
    for seed in range(instances):
        inst = synthetic.instance(spec, seed, ratio)
        table[seed] = [screen(inst, m).rejection_fraction for m in MS]
    strict = np.mean(table[:, MS.index(2)] > table[:, MS.index(1)])
    return table.mean(axis=0), strict


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--instances", type=int, default=20)
    parser.add_argument("--ratio", type=float, default=0.4)
    parser.add_argument("--n", type=int, default=50)
    parser.add_argument("--p", type=int, default=500)
    args = parser.parse_args()
    models = [("iid", 2), ("atom", 1), ("sparse", 2), ("sparse", 3), ("sparse", 5)]
    print("model,atoms," + ",".join(f"m={m}" for m in MS) + ",strict_gain_1_to_2")
    for model, atoms in models:
        means, strict = run(model, atoms, args.ratio, args.instances, args.n, args.p)
        print(f"{model},{atoms}," + ",".join(f"{v:.3f}" for v in means) + f",{strict:.2f}")


if __name__ == "__main__":
    main()
