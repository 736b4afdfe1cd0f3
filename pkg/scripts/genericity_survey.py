"""Fraction of generic directions and cap-measure bounds across random configurations.

Usage: python3 scripts/genericity_survey.py [--configs 5] [--directions 2000] [--seed 0]
"""
import argparse

from ghlab.config import generate_config
from ghlab.directions import cap_estimate, genericity_survey


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--configs", type=int, default=5)
    ap.add_argument("--directions", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print("config  centers  fraction_generic  accumulating")
    for k in range(args.configs):
        cfg = generate_config("random_ball", radius=1.0, count=10 + 5 * k, seed=args.seed + k)
        s = genericity_survey(cfg, args.directions, seed=args.seed)
        print(f"{k:6d}  {len(cfg):7d}  {s.fraction_generic:16.4f}  {s.fraction_accumulating_heuristic:12.4f}")

    gz = generate_config("geometric_z", ratio=2.0, count=20)
    print("\nn      exact_sum   bound      MC union (+- sigma)")
    for n in (0.25, 0.5, 1.0, 2.0):
        est = cap_estimate(gz, n, samples=200_000, seed=args.seed)
        print(f"{n:<5}  {est.exact_sum:9.5f}  {est.bound:9.5f}  {est.mc_union_estimate:9.5f} (+- {est.mc_stddev:.5f})")


if __name__ == "__main__":
    main()
