"""Exact-constant SFO/PO bounds of ProxSVRG+ across minibatch sizes, with b* marked.

    python3 scripts/complexity_sweep.py --n 10000 --eps 0.01
"""

import argparse

import numpy as np

from proxsvrg.complexity import BoundQuery, bounds_theorem1, comparison_rows, optimal_minibatch


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10**4)
    ap.add_argument("--eps", type=float, default=0.01)
    ap.add_argument("--points", type=int, default=15)
    args = ap.parse_args()
    best = optimal_minibatch(BoundQuery(n=args.n, b=1, eps=args.eps)).b_star
    sizes = sorted({int(b) for b in np.geomspace(1, args.n, args.points)} | {best})
    print("b,sfo,po,proxsvrg_po,marker")
    for b in sizes:
        q = BoundQuery(n=args.n, b=b, eps=args.eps)
        r = bounds_theorem1(q)
        svrg = comparison_rows(q)["ProxSVRG"]
        print(f"{b},{r.sfo:.6g},{r.po:.6g},{svrg.po:.6g},{'b*' if b == best else ''}")


if __name__ == "__main__":
    main()
