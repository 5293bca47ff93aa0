"""Sweep random rational curves and report vol2 against the degree-product bound."""

import argparse
import json
import time
from dataclasses import asdict, dataclass

import numpy as np

from amoeba.quadrature import vol2
from amoeba.ratfun import random_curve, serialize_curve
from amoeba.sheets import theorem41_bound


@dataclass(frozen=True)
class Config:
    count: int = 50
    seed: int = 2024
    rel_tol: float = 1e-6
    max_factors: int = 4
    max_mult: int = 2


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    for k, v in asdict(Config()).items():
        ap.add_argument(f"--{k.replace('_', '-')}", type=type(v), default=v)
    cfg = Config(**vars(ap.parse_args(argv)))
    rng = np.random.default_rng(cfg.seed)
    rows, t0 = [], time.perf_counter()
    for i in range(cfg.count):
        f = random_curve(rng, (2, 3, 4)[i % 3], max_factors=cfg.max_factors, max_mult=cfg.max_mult)
        res = vol2(f, cfg.rel_tol)
        bound = theorem41_bound(f)
        rows.append({"curve": serialize_curve(f), "vol2": res.value, "bound": bound, "ratio": res.value / bound})
    worst = max(r["ratio"] for r in rows)
    print(json.dumps({"config": asdict(cfg), "seconds": time.perf_counter() - t0, "max_ratio": worst, "rows": rows}, indent=2))
    return 0 if worst <= 1 + cfg.rel_tol else 1


if __name__ == "__main__":
    raise SystemExit(main())
