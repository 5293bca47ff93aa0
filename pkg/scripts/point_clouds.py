"""Write n = 3 amoeba point clouds as CSV and an n = 2 raster as PPM."""

import argparse
from dataclasses import asdict, dataclass
from pathlib import Path

from amoeba.ratfun import curve
from amoeba.sheets import raster_forward


@dataclass(frozen=True)
class Config:
    out_dir: str = "figures"
    samples: int = 200_000
    resolution: int = 512
    half_width: float = 3.0
    seed: int = 0


CLOUDS = {
    "real_line_3d.csv": ("z", "z+0.5", "z-1.5"),
    "complex_line_3d.csv": ("z", "z+1", "z-2i"),
}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    for k, v in asdict(Config()).items():
        ap.add_argument(f"--{k.replace('_', '-')}", type=type(v), default=v)
    cfg = Config(**vars(ap.parse_args(argv)))
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    h = cfg.half_width
    for name, comps in CLOUDS.items():
        r = raster_forward(curve(*comps), (-h, h) * 3, cfg.resolution, cfg.samples, cfg.seed)
        (out / name).write_text(r.to_csv())
        print(f"{name}: {len(r.points)} points")
    r = raster_forward(curve("z", "z-1"), (-4, 4, -4, 4), cfg.resolution, cfg.samples, cfg.seed)
    (out / "line_pair.ppm").write_bytes(r.to_ppm())
    print(f"line_pair.ppm: area estimate {r.area_estimate:.6f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
