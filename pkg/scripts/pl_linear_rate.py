"""Log-gap slopes of ProxSVRG+ (last iterate, no restart) and ProxGD on PL quadratics.

    python3 scripts/pl_linear_rate.py --seeds 0,1,2 --epochs 60
"""

import argparse

import numpy as np

from proxsvrg.optimizers import OptimizerConfig, run
from proxsvrg.problems import random_pl_quadratic


def slope(gaps, floor):
    k = np.flatnonzero(gaps > floor)
    return float(np.polyfit(k, np.log(gaps[k]), 1)[0])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--d", type=int, default=10)
    ap.add_argument("--lam", type=float, default=0.1)
    ap.add_argument("--b", type=int, default=16)
    ap.add_argument("--epochs", type=int, default=60)
    ap.add_argument("--seeds", default="0,1,2,3,4")
    args = ap.parse_args()
    m = max(1, int(round(np.sqrt(args.b))))
    print("seed,ratio_lt_1,slope_proxsvrg+,slope_proxgd,slope_ratio")
    for seed in (int(s) for s in args.seeds.split(",")):
        prob = random_pl_quadratic(args.n, args.d, mu=1.0, L=4.0, lam=args.lam, seed=seed)
        x0 = prob.initial_point(seed)
        floor = 1e-11 * max(1.0, abs(prob.phi_star))
        plus = run("proxsvrg+", prob, OptimizerConfig(B=args.n, b=args.b, m=m, eta=1 / (6 * prob.L),
                                                       epochs=args.epochs, output_mode="last", seed=seed),
                   x0, stride=m)
        gd = run("proxgd", prob, OptimizerConfig(B=args.n, b=args.n, m=1, eta=1 / prob.L, epochs=args.epochs,
                                                 output_mode="last"), x0)
        gp = np.array([r.objective for r in plus.trace]) - prob.phi_star
        gg = np.array([r.objective for r in gd.trace]) - prob.phi_star
        sp, sg = slope(gp, floor), slope(gg, floor)
        print(f"{seed},{np.mean(gp[1:] < gp[:-1]):.3f},{sp:.4f},{sg:.4f},{sp / sg:.3f}")


if __name__ == "__main__":
    main()
