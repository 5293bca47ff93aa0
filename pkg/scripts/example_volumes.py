"""Volumes, sheet counts, areas and bounds for the worked example curves."""

import argparse
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from amoeba.quadrature import vol2
from amoeba.ratfun import RationalComponent, RationalCurve, curve, serialize_curve
from amoeba.sheets import area, theorem41_bound


@dataclass(frozen=True)
class Config:
    rel_tol: float = 1e-6
    samples: int = 16
    seed: int = 0
    max_m: int = 3


def roots_of_unity_curve(m: int) -> RationalCurve:
    roots = np.round(np.exp(2j * np.pi * np.arange(m) / m), 15)
    return RationalCurve((RationalComponent(1, ((0, 1),)), RationalComponent(1, tuple((complex(r), 1) for r in roots))))


def examples(cfg: Config) -> dict[str, RationalCurve]:
    out = {"line pair": curve("z", "z-1")}
    out.update({f"(z, z^{m}-1)": roots_of_unity_curve(m) for m in range(1, cfg.max_m + 1)})
    out["real line in 3-space"] = curve("z", "z+0.5", "z-1.5")
    out["complex line in 3-space"] = curve("z", "z+1", "z-2i")
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    for k, v in asdict(Config()).items():
        ap.add_argument(f"--{k.replace('_', '-')}", type=type(v), default=v)
    cfg = Config(**vars(ap.parse_args(argv)))
    rows = []
    for name, f in examples(cfg).items():
        a = area(f, cfg.rel_tol, samples=cfg.samples, seed=cfg.seed)
        v = a.volume.value
        rows.append(
            {
                "name": name,
                "curve": serialize_curve(f),
                "vol2": v,
                "vol2_over_pi2": v / math.pi**2,
                "bound": theorem41_bound(f),
                "sheets": [a.sheets.p_min, a.sheets.p_max],
                "area": a.value,
                "area_bounds": [a.lower, a.upper],
            }
        )
    print(json.dumps({"config": asdict(cfg), "rows": rows}, indent=2))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
