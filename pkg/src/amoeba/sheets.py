"""Covering sheet counts of Log o f, true amoeba area, and forward rasters."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .density import density_values, is_degenerate, min_support_distance
from .quadrature import DegenerateCurveError, QuadratureParams, QuadratureResult, decompose_plane, vol2
from .ratfun import RationalCurve

RESIDUAL_TOL = 1e-16  # on the sum of squared log residuals
DEDUP_TOL = 1e-6
MAX_SEEDS = 40_000


class Fiber(list):
    """Distinct preimages of a target point; ``exhausted`` flags a capped search."""

    exhausted: bool = False


def _lm_solve(f: RationalCurve, x: np.ndarray, z: np.ndarray, iters: int = 120) -> tuple[np.ndarray, np.ndarray]:
    """Damped Gauss-Newton on sum_j (log|f_j(z)| - x_j)^2 for many seeds at once.

    ``x`` is either one target (n,) or one target per seed (N, n).
    Steps are clipped to half the distance to the nearest support point so a
    seed never jumps over a zero or pole.
    """
    support = f.support_array
    z = np.array(z, dtype=complex)
    lam = np.full(z.shape, 1e-3)

    def resid(zz, xx):
        with np.errstate(divide="ignore", invalid="ignore"):
            r = f.log_map(zz) - xx
        return r, np.sum(r * r, axis=-1)

    r, F = resid(z, x)
    F = np.where(np.isfinite(F), F, np.inf)
    active = np.isfinite(F)
    for _ in range(iters):
        idx = np.flatnonzero(active & (F > 1e-30))
        if idx.size == 0:
            break
        zi = z[idx]
        xi = x if x.ndim == 1 else x[idx]
        g = f.log_derivatives(zi)
        gr, gi = g.real, -g.imag
        ri = r[idx]
        a11 = np.sum(gr * gr, axis=-1)
        a12 = np.sum(gr * gi, axis=-1)
        a22 = np.sum(gi * gi, axis=-1)
        b1 = np.sum(gr * ri, axis=-1)
        b2 = np.sum(gi * ri, axis=-1)
        li = lam[idx]
        m11 = a11 * (1 + li) + 1e-300
        m22 = a22 * (1 + li) + 1e-300
        det = m11 * m22 - a12 * a12
        dx = -(m22 * b1 - a12 * b2) / det
        dy = -(m11 * b2 - a12 * b1) / det
        step = dx + 1j * dy
        limit = 0.5 * min_support_distance(zi, support) if support.size else np.inf
        big = np.abs(step) > limit
        step = np.where(big, step / np.abs(step) * limit, step)
        step = np.where(np.isfinite(step), step, 0)
        zt = zi + step
        rt, Ft = resid(zt, xi)
        Ft = np.where(np.isfinite(Ft), Ft, np.inf)
        ok = Ft < F[idx]
        z[idx[ok]] = zt[ok]
        r[idx[ok]] = rt[ok]
        F[idx[ok]] = Ft[ok]
        lam[idx] = np.where(ok, np.maximum(li / 3, 1e-12), li * 4)
        active[idx[~ok & (li * 4 > 1e12)]] = False
    return z, F


def _dedupe(points: np.ndarray, tol: float = DEDUP_TOL) -> list[complex]:
    out: list[complex] = []
    for p in sorted(points.tolist(), key=lambda c: (c.real, c.imag)):
        if all(abs(p - q) > tol for q in out):
            out.append(p)
    return out


def _seeds(f: RationalCurve, radius: float, spacing: float) -> tuple[np.ndarray, bool]:
    n_axis = int(math.ceil(2 * radius / spacing)) + 1
    exhausted = n_axis * n_axis > MAX_SEEDS
    n_axis = min(n_axis, int(math.sqrt(MAX_SEEDS)))
    g = np.linspace(-radius, radius, n_axis)
    # shift off lattice lines through typical roots
    g = g + 0.5 * (g[1] - g[0]) * 0.3183
    grid = (g[None, :] + 1j * g[:, None]).ravel()
    extra = []
    ang = np.exp(2j * np.pi * (np.arange(12) + 0.25) / 12)
    for a in f.support_array:
        for rr in (0.3, 0.03, 3e-3):
            extra.append(a + rr * spacing * ang)
    for rr in (2.0, 10.0, 100.0):
        extra.append(rr * radius * ang)
    return np.concatenate([grid] + extra), exhausted


def enumerate_preimages(
    f: RationalCurve,
    x,
    search_radius: float | None = None,
    spacing: float | None = None,
    extra_seeds=(),
) -> Fiber:
    """All z with Log f(z) = x, found from a dense grid of seeds."""
    x = np.asarray(x, dtype=float)
    if x.shape != (f.n,):
        raise ValueError(f"target must have {f.n} coordinates")
    dec = decompose_plane(f, check=False)
    radius = max(search_radius or 0.0, dec.r_out)
    support = f.support_array
    if spacing is None:
        sep = 3 * dec.singular_disks[0][1] if support.size > 1 else 1.0
        spacing = min(sep / 3.5, radius / 20)
    seeds, exhausted = _seeds(f, radius, spacing)
    seeds = np.concatenate([seeds, np.asarray(extra_seeds, dtype=complex).ravel()])
    seeds = seeds[min_support_distance(seeds, support) > 0]
    z, F = _lm_solve(f, x, seeds)
    good = z[F < RESIDUAL_TOL]
    out = Fiber(_dedupe(good))
    out.exhausted = exhausted
    return out


@dataclass(frozen=True)
class SheetReport:
    samples: tuple[tuple[tuple[float, ...], int], ...]
    p_min: int
    p_max: int
    exhausted: bool = False

    @property
    def uniform(self) -> bool:
        return self.p_min == self.p_max

    def to_dict(self) -> dict:
        return {
            "samples": [{"x": list(x), "count": c} for x, c in self.samples],
            "p_min": self.p_min,
            "p_max": self.p_max,
            "uniform": self.uniform,
            "exhausted": self.exhausted,
        }


def regular_samples(f: RationalCurve, count: int, seed: int = 0) -> np.ndarray:
    """Domain points away from the support and the critical locus."""
    rng = np.random.default_rng(seed)
    dec = decompose_plane(f, check=False)
    radius = dec.r_out / 2
    keep = dec.singular_disks[0][1] / 4
    cand = np.empty(0, dtype=complex)
    while cand.size < 4 * count:
        r = radius * np.sqrt(rng.random(8 * count))
        z = r * np.exp(2j * np.pi * rng.random(8 * count))
        cand = np.concatenate([cand, z[min_support_distance(z, f.support_array) > keep]])
    dens = density_values(f, cand)
    cand = cand[dens > np.median(dens) / 10]
    return cand[:count]


def sheet_report(f: RationalCurve, samples: int = 16, seed: int = 0) -> SheetReport:
    if samples < 8:
        raise ValueError("need at least 8 samples")
    if is_degenerate(f):
        raise DegenerateCurveError("curve lies in a one-dimensional subtorus; no regular sheets")
    rows = []
    exhausted = False
    for z0 in regular_samples(f, samples, seed):
        x = f.log_map(z0)
        fib = enumerate_preimages(f, x, extra_seeds=[z0])
        exhausted |= fib.exhausted
        rows.append((tuple(float(v) for v in x), max(1, len(fib))))
    counts = [c for _, c in rows]
    return SheetReport(tuple(rows), min(counts), max(counts), exhausted)


@dataclass
class AreaResult:
    """True amoeba area, exact under a uniform covering, otherwise an interval."""

    lower: float
    upper: float
    exact_covering: bool
    volume: QuadratureResult
    sheets: SheetReport

    @property
    def value(self) -> float | None:
        return self.lower if self.exact_covering else None

    def to_dict(self) -> dict:
        return {
            "area": self.value,
            "interval": [self.lower, self.upper],
            "flag": "exact-covering" if self.exact_covering else "bounds-only",
            "vol2": self.volume.to_dict(),
            "sheets": self.sheets.to_dict(),
        }


def area(
    f: RationalCurve,
    rel_tol: float | None = None,
    samples: int = 16,
    seed: int = 0,
    params: QuadratureParams | None = None,
) -> AreaResult:
    if is_degenerate(f):
        raise DegenerateCurveError("curve lies in a one-dimensional subtorus; its amoeba is a line")
    vol = vol2(f, rel_tol, params)
    rep = sheet_report(f, samples, seed)
    return AreaResult(vol.value / rep.p_max, vol.value / rep.p_min, rep.uniform, vol, rep)


def theorem41_bound(f: RationalCurve) -> float:
    """pi^2 times the sum over coordinate pairs of the zero/pole count products."""
    counts = [c.pole_zero_count() for c in f.components]
    return math.pi**2 * sum(a * b for a, b in combinations(counts, 2))


# ---------------------------------------------------------------------------
# Forward rasters
# ---------------------------------------------------------------------------


@dataclass
class AmoebaRaster:
    window: tuple[float, ...]
    resolution: int
    covered: np.ndarray | None = None
    points: np.ndarray | None = None
    area_estimate: float | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def pixel_area(self) -> float:
        x0, x1, y0, y1 = self.window[:4]
        return (x1 - x0) * (y1 - y0) / self.resolution**2

    def to_ppm(self) -> bytes:
        if self.covered is None:
            raise ValueError("only 2-d rasters export to PPM")
        ny, nx = self.covered.shape
        img = np.where(self.covered, 0, 255).astype(np.uint8)
        return f"P5\n{nx} {ny}\n255\n".encode() + img.tobytes()

    def to_csv(self) -> str:
        if self.points is None:
            raise ValueError("only point clouds export to CSV")
        head = ",".join(f"x{i + 1}" for i in range(self.points.shape[1]))
        return head + "\n" + "\n".join(",".join(repr(float(v)) for v in p) for p in self.points) + "\n"

    def to_dict(self) -> dict:
        return {
            "window": list(self.window),
            "resolution": self.resolution,
            "area_estimate": self.area_estimate,
            "covered_pixels": None if self.covered is None else int(self.covered.sum()),
            "points": None if self.points is None else int(len(self.points)),
            "diagnostics": self.diagnostics,
        }


def mark_pixels(window, resolution: int, xy: np.ndarray) -> np.ndarray:
    """Boolean image, row 0 at the top (largest second coordinate)."""
    x0, x1, y0, y1 = window
    img = np.zeros((resolution, resolution), dtype=bool)
    col = np.floor((xy[:, 0] - x0) / (x1 - x0) * resolution).astype(np.int64)
    row = np.floor((y1 - xy[:, 1]) / (y1 - y0) * resolution).astype(np.int64)
    ok = (col >= 0) & (col < resolution) & (row >= 0) & (row < resolution)
    img[row[ok], col[ok]] = True
    return img


def _stratified(rng: np.random.Generator, count: int) -> tuple[np.ndarray, np.ndarray]:
    side = max(1, int(math.sqrt(count)))
    i, j = np.divmod(np.arange(side * side), side)
    u = (i + rng.random(side * side)) / side
    v = (j + rng.random(side * side)) / side
    return u, v


def domain_samples(f: RationalCurve, samples: int, reach: float, seed: int = 0) -> np.ndarray:
    """Stratified points covering C: a central disk, log-radial shells at
    every support point, and a log-radial shell towards infinity."""
    rng = np.random.default_rng(seed)
    dec = decompose_plane(f, check=False)
    rho = dec.singular_disks[0][1] if f.support_array.size else 1.0
    r_out = dec.r_out
    depth = reach + 5.0
    n_sup = max(1, f.support_array.size)
    parts = []
    u, v = _stratified(rng, int(0.4 * samples))
    parts.append(r_out * np.sqrt(u) * np.exp(2j * np.pi * v))
    for a in f.support_array:
        u, v = _stratified(rng, int(0.4 * samples / n_sup))
        parts.append(a + rho * np.exp(-depth * u) * np.exp(2j * np.pi * v))
    u, v = _stratified(rng, int(0.2 * samples))
    parts.append(r_out * np.exp(depth * u) * np.exp(2j * np.pi * v))
    z = np.concatenate(parts)
    return z[min_support_distance(z, f.support_array) > 0]


def raster_forward(
    f: RationalCurve,
    window=None,
    resolution: int = 512,
    samples: int = 1_000_000,
    seed: int = 0,
) -> AmoebaRaster:
    """Image of stratified domain samples under Log f.

    For n = 2 pixels hit by a sample are marked; a second pass re-samples
    around domain points whose pixels sit on the edge of the marked set.
    For n = 3 the clipped point cloud is returned.
    """
    if f.n not in (2, 3):
        raise ValueError("forward rasters support n = 2 or n = 3")
    if window is None:
        window = (-4.0, 4.0) * f.n
    window = tuple(float(w) for w in window)
    if len(window) != 2 * f.n or any(window[2 * i + 1] <= window[2 * i] for i in range(f.n)):
        raise ValueError(f"window needs {2 * f.n} increasing bounds")
    reach = max(abs(w) for w in window)
    main = int(0.8 * samples) if f.n == 2 else samples
    z = domain_samples(f, main, reach, seed)
    X = f.log_map(z)
    lo = np.array(window[0::2])
    hi = np.array(window[1::2])
    inside = np.all((X >= lo) & (X < hi), axis=1)
    if f.n == 3:
        return AmoebaRaster(window, resolution, points=X[inside], diagnostics={"samples": int(z.size)})

    img = mark_pixels(window, resolution, X)
    rng = np.random.default_rng(seed + 1)
    extra = samples - main
    x0, x1, y0, y1 = window
    # refine: jitter preimages of pixels on the frontier of the marked set
    on = inside & _frontier(img)[_pixel_index(window, resolution, X)]
    base = z[on]
    if base.size and extra > 0:
        pick = base[rng.integers(0, base.size, extra)]
        g = np.abs(f.log_derivatives(pick)).max(axis=1)
        scale = (x1 - x0) / resolution / np.maximum(g, 1e-300)
        jitter = scale * np.sqrt(rng.random(extra)) * np.exp(2j * np.pi * rng.random(extra))
        zz = pick + jitter
        zz = zz[min_support_distance(zz, f.support_array) > 0]
        z = np.concatenate([z, zz])
        X = f.log_map(z)
        img = mark_pixels(window, resolution, X)
    dropped = _verify_frontier(f, window, resolution, img, z, X)
    area_est = float(img.sum()) * (x1 - x0) * (y1 - y0) / resolution**2
    return AmoebaRaster(window, resolution, covered=img, area_estimate=area_est,
                        diagnostics={"samples": int(z.size), "frontier_dropped": dropped})


def _pixel_index(window, resolution: int, xy: np.ndarray):
    x0, x1, y0, y1 = window
    col = np.floor((xy[:, 0] - x0) / (x1 - x0) * resolution).astype(np.int64)
    row = np.floor((y1 - xy[:, 1]) / (y1 - y0) * resolution).astype(np.int64)
    return np.clip(row, 0, resolution - 1), np.clip(col, 0, resolution - 1)


def _frontier(img: np.ndarray) -> np.ndarray:
    pad = np.pad(img, 1)
    core = pad[:-2, 1:-1] & pad[2:, 1:-1] & pad[1:-1, :-2] & pad[1:-1, 2:]
    return img & ~core


def _verify_frontier(f, window, resolution, img, z, X, tries: int = 3) -> int:
    """Keep a frontier pixel only if its centre has a preimage.

    Interior pixels are kept as they are; the test turns the raster into a
    centre-sampled image of the amoeba, which undercounts cut boundary pixels.
    """
    x0, x1, y0, y1 = window
    row, col = _pixel_index(window, resolution, X)
    inside = (X[:, 0] >= x0) & (X[:, 0] < x1) & (X[:, 1] >= y0) & (X[:, 1] < y1)
    front = _frontier(img)
    sel = np.flatnonzero(inside & front[row, col])
    if sel.size == 0:
        return 0
    key = row[sel] * resolution + col[sel]
    order = np.lexsort((sel, key))
    sel, key = sel[order], key[order]
    first = np.searchsorted(key, key, side="left")
    sel, key = sel[np.arange(sel.size) - first < tries], key[np.arange(sel.size) - first < tries]
    r, c = np.divmod(key, resolution)
    h = (x1 - x0) / resolution
    target = np.stack([x0 + (c + 0.5) * h, y1 - (r + 0.5) * (y1 - y0) / resolution], axis=1)
    _, F = _lm_solve(f, target, z[sel], iters=60)
    hit = np.zeros(resolution * resolution, dtype=bool)
    hit[key[F < 1e-20]] = True
    cand = np.unique(key)
    drop = cand[~hit[cand]]
    img.ravel()[drop] = False
    return int(drop.size)


def to_json(obj) -> str:
    return json.dumps(obj.to_dict())
