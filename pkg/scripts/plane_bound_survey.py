"""Compare rasterized plane-curve amoeba areas with the pi^2 * Newton polygon area bound."""

import argparse
import json
from dataclasses import asdict, dataclass

import numpy as np

from amoeba.planecurve import LaurentPolynomial, check_pr, parse_laurent, pr_bound


@dataclass(frozen=True)
class Config:
    resolution: int = 300
    random: int = 10
    seed: int = 0


FIXED = ["1 + z + w", "z^2 - w - 1", "1 + z + w + z*w", "1 + z + w + z*w^2 + 3*z^2*w", "z + w + 0.25*z^-1*w^-1"]


def random_poly(rng: np.random.Generator) -> LaurentPolynomial:
    while True:
        k = int(rng.integers(3, 7))
        terms = {tuple(int(e) for e in rng.integers(-2, 3, 2)): complex(*rng.integers(-4, 5, 2)) for _ in range(k)}
        p = LaurentPolynomial.from_mapping({e: c for e, c in terms.items() if c})
        if len(p.terms) >= 3 and p.w_degree > 0 and pr_bound(p) > 0:
            return p


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    for k, v in asdict(Config()).items():
        ap.add_argument(f"--{k.replace('_', '-')}", type=type(v), default=v)
    cfg = Config(**vars(ap.parse_args(argv)))
    rng = np.random.default_rng(cfg.seed)
    polys = [parse_laurent(t) for t in FIXED] + [random_poly(rng) for _ in range(cfg.random)]
    rows = []
    for p in polys:
        rep = check_pr(p, resolution=cfg.resolution)
        rows.append({"poly": str(p), **{k: v for k, v in rep.to_dict().items() if k != "raster"}})
    print(json.dumps({"config": asdict(cfg), "rows": rows}, indent=2))
    return 0 if all(r["pass"] for r in rows) else 1


if __name__ == "__main__":
    raise SystemExit(main())
