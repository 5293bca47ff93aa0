"""Command-line entry point: ``amoeba <command> [options]``.

Exit status: 0 success, 1 input or usage error, 2 numeric failure,
3 degenerate curve (contained in a one-dimensional subtorus).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from . import planecurve, quadrature, sheets, tropical
from .density import is_degenerate
from .ratfun import ParseError, RationalCurve, curve_from_dict, parse_curve, serialize_curve

COMMANDS = ("vol2", "area", "bound", "sheets", "limitset", "raster", "plane-raster", "plane-bound", "diagnose")
FORMATS = {
    "raster": ("json", "ppm", "csv"),
    "plane-raster": ("json", "ppm"),
}
PLANE = ("plane-raster", "plane-bound")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_DEGENERATE = 0, 1, 2, 3
SUBTORUS_MESSAGE = (
    "degenerate curve: Log f lies in a translate of a one-dimensional subtorus, "
    "so the amoeba is a line and the requested quantity is undefined"
)


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    curve: str | None = None
    poly: str | None = None
    input: str | None = None
    rel_tol: float = quadrature.DEFAULT_REL_TOL
    seed: int = 0
    window: tuple[float, ...] | None = None
    res: int | None = None
    samples: int | None = None
    format: str = "json"
    output: str | None = None
    check: bool = False
    max_evals: int = quadrature.DEFAULT_MAX_EVALS

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if not 1e-10 < self.rel_tol < 1e-1:
            raise UsageError("--rel-tol must lie in (1e-10, 1e-1)")
        if self.format not in FORMATS.get(self.command, ("json",)):
            raise UsageError(f"format {self.format!r} is not available for {self.command}")
        if self.res is not None and self.res < 1:
            raise UsageError("--res must be positive")
        if self.samples is not None and self.samples < 1:
            raise UsageError("--samples must be positive")
        if self.max_evals < 1:
            raise UsageError("--max-evals must be positive")

    @property
    def quadrature(self) -> quadrature.QuadratureParams:
        return quadrature.QuadratureParams(rel_tol=self.rel_tol, max_evals=self.max_evals)

    def defaults(self) -> dict:
        d = asdict(self)
        d["window"] = None if self.window is None else list(self.window)
        d.pop("output")
        return d


def _read_input(cfg: RunConfig, plane: bool):
    text = cfg.poly if plane else cfg.curve
    if cfg.input is not None:
        try:
            text = Path(cfg.input).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {cfg.input}: {exc}") from exc
    if text is None:
        raise UsageError("--poly or --input is required" if plane else "--curve or --input is required")
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.pos) from exc
        return planecurve.LaurentPolynomial.from_dict(data) if plane else curve_from_dict(data)
    return planecurve.parse_laurent(stripped) if plane else parse_curve(stripped)


def _require_regular(f: RationalCurve) -> None:
    if f.support_array.size == 0 or is_degenerate(f):
        raise quadrature.DegenerateCurveError(SUBTORUS_MESSAGE)


def _vol2(cfg, f):
    res = quadrature.vol2(f, params=cfg.quadrature)
    if not res.converged:
        raise ArithmeticError(f"evaluation budget exhausted; error {res.error_estimate:.3e} above tolerance")
    bound = sheets.theorem41_bound(f)
    return {"result": res.to_dict(), "theorem41_bound": bound, "ratio": res.value / bound if bound else None}


def _area(cfg, f):
    _require_regular(f)
    out = sheets.area(f, samples=cfg.samples or 16, seed=cfg.seed, params=cfg.quadrature)
    if not out.volume.converged:
        raise ArithmeticError("evaluation budget exhausted")
    return {"result": out.to_dict(), "theorem41_bound": sheets.theorem41_bound(f)}


def _bound(cfg, f):
    counts = [c.pole_zero_count() for c in f.components]
    return {"result": {"bound": sheets.theorem41_bound(f), "pole_zero_counts": counts}}


def _sheets(cfg, f):
    _require_regular(f)
    return {"result": sheets.sheet_report(f, samples=cfg.samples or 16, seed=cfg.seed).to_dict()}


def _limitset(cfg, f):
    ls = tropical.limit_directions(f)
    return {"result": {"directions": [d.to_dict() for d in ls], "degenerate": ls.degenerate}}


def _diagnose(cfg, f):
    _require_regular(f)
    return {"result": quadrature.diagnose(f, seed=cfg.seed).to_dict()}


def _raster(cfg, f):
    r = sheets.raster_forward(f, cfg.window, cfg.res or 512, cfg.samples or 1_000_000, cfg.seed)
    if cfg.format == "ppm":
        if r.covered is None:
            raise UsageError("ppm output needs a curve with n = 2")
        return r.to_ppm()
    if cfg.format == "csv":
        if r.points is None:
            raise UsageError("csv output needs a curve with n = 3")
        return r.to_csv()
    return {"result": r.to_dict()}


def _plane_raster(cfg, p):
    res = cfg.res or 600
    angles = max(1, (cfg.samples or res * res) // res)
    r = planecurve.raster_amoeba(p, cfg.window, res, fibers=res, angles=angles, seed=cfg.seed)
    if cfg.format == "ppm":
        return r.to_ppm()
    return {"result": r.to_dict(), "pr_bound": planecurve.pr_bound(p)}


def _plane_bound(cfg, p):
    poly = planecurve.newton_polygon(p)
    out = {
        "vertices": [list(v) for v in poly.vertices],
        "polygon_area": planecurve.polygon_area(poly),
        "bound": planecurve.pr_bound(p),
    }
    if cfg.check:
        res = cfg.res or 600
        angles = max(1, (cfg.samples or res * res) // res)
        out["check"] = planecurve.check_pr(
            p, window=cfg.window, resolution=res, fibers=res, angles=angles, seed=cfg.seed
        ).to_dict()
    return {"result": out}


HANDLERS = {
    "vol2": _vol2,
    "area": _area,
    "bound": _bound,
    "sheets": _sheets,
    "limitset": _limitset,
    "diagnose": _diagnose,
    "raster": _raster,
    "plane-raster": _plane_raster,
    "plane-bound": _plane_bound,
}


def run(cfg: RunConfig) -> tuple[int, bytes | str]:
    """Execute one command; returns (exit status, artifact or error message)."""
    plane = cfg.command in PLANE
    try:
        obj = _read_input(cfg, plane)
        out = HANDLERS[cfg.command](cfg, obj)
    except (ParseError, UsageError) as exc:
        return EXIT_INPUT, f"error: {exc}"
    except quadrature.DegenerateCurveError as exc:
        return EXIT_DEGENERATE, f"error: {exc}"
    except ValueError as exc:
        return EXIT_INPUT, f"error: {exc}"
    except ArithmeticError as exc:
        return EXIT_NUMERIC, f"error: {exc}"
    if isinstance(out, (bytes, str)):
        return EXIT_OK, out
    doc = {"command": cfg.command, "config": cfg.defaults()}
    doc["input"] = str(obj) if plane else serialize_curve(obj)
    doc.update(out)
    return EXIT_OK, json.dumps(_finite(doc), indent=2, allow_nan=False) + "\n"


def _finite(x):
    """Replace NaN and infinities by null so the output is strict JSON."""
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    return x


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _window(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("window must be comma-separated numbers") from None
    if len(vals) not in (4, 6):
        raise argparse.ArgumentTypeError("window needs 4 (n = 2) or 6 (n = 3) numbers")
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="amoeba", description="Amoeba areas and volumes of rational and plane curves.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--curve", help="components separated by ';', e.g. \"z ; (z-1)(z+1)\"")
    ap.add_argument("--poly", help="Laurent polynomial in z, w, e.g. \"1+z+w\"")
    ap.add_argument("--input", help="file with a curve or polynomial (text or JSON)")
    ap.add_argument("--rel-tol", type=float, default=quadrature.DEFAULT_REL_TOL)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--window", type=_window, help="x1,x2,y1,y2[,z1,z2]")
    ap.add_argument("--res", type=int)
    ap.add_argument("--samples", type=int)
    ap.add_argument("--format", default="json", choices=("json", "csv", "ppm"))
    ap.add_argument("--output", help="write here instead of stdout")
    ap.add_argument("--check", action="store_true", help="plane-bound: also rasterize and compare")
    ap.add_argument("--max-evals", type=int, default=quadrature.DEFAULT_MAX_EVALS, help="integrand evaluation budget")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            curve=args.curve,
            poly=args.poly,
            input=args.input,
            rel_tol=args.rel_tol,
            seed=args.seed,
            window=args.window,
            res=args.res,
            samples=args.samples,
            format=args.format,
            output=args.output,
            check=args.check,
            max_evals=args.max_evals,
        )
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    status, payload = run(cfg)
    if status != EXIT_OK:
        print(payload, file=sys.stderr)
        return status
    data = payload.encode() if isinstance(payload, str) else payload
    if cfg.output:
        Path(cfg.output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
