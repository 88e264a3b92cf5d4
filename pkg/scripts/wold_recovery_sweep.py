"""Plant random TCK families and check that the Wold decomposition recovers them."""

import argparse
import time

import numpy as np

from ckdilate.planted import PlantConfig, complement_intertwining, plant
from ckdilate.wold import wold_decompose


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--depth", type=int, default=5)
    ap.add_argument("--max-dim", type=int, default=400)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    cfg = PlantConfig(depth=args.depth, max_dim=args.max_dim)
    wrong, worst, t0 = 0, 0.0, time.perf_counter()
    for k in range(args.count):
        p = plant(rng, cfg)
        w = wold_decompose(p.family)
        got = {v: w.multiplicities.get(v, 0) for v in p.alpha}
        err = complement_intertwining(p, w.complement, w.complement_family) if p.full_ck_cols.shape[1] else 0.0
        worst = max(worst, err)
        if got != p.alpha:
            wrong += 1
            print(f"#{k}: planted {p.alpha} recovered {got}")
    print(f"{args.count} families, {wrong} mismatches, worst complement defect {worst:.2e}, "
          f"{time.perf_counter() - t0:.1f}s")
    return 1 if wrong else 0


if __name__ == "__main__":
    raise SystemExit(main())
