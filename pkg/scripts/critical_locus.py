"""Export critical-locus samples of Log f as CSV rows re,im."""

import argparse
import sys
from dataclasses import asdict, dataclass

from amoeba.density import critical_locus_sample
from amoeba.ratfun import parse_curve


@dataclass(frozen=True)
class Config:
    curve: str = "z ; z+0.5 ; z-1.5"
    half_width: float = 3.0
    resolution: int = 400


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    for k, v in asdict(Config()).items():
        ap.add_argument(f"--{k.replace('_', '-')}", type=type(v), default=v)
    cfg = Config(**vars(ap.parse_args(argv)))
    h = cfg.half_width
    pts = critical_locus_sample(parse_curve(cfg.curve), (-h, h, -h, h), cfg.resolution)
    sys.stdout.write("re,im\n" + "".join(f"{z.real:.17g},{z.imag:.17g}\n" for z in pts))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
