"""Amoebas of implicit plane curves p(z, w) = 0 given by Laurent polynomials.

The raster is built fiber by fiber: for fixed |z| = e^x the roots w(theta)
of p(e^{x + i theta}, w) are tracked continuously around the circle. Each
tracked branch is a continuous path, so every value of log|w| between two
consecutive samples belongs to the amoeba slice over x. A pixel is marked
when its centre falls in such an interval, which never overcounts the slice.
"""

from __future__ import annotations

import json
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cubature import worker_count
from .ratfun import ParseError
from .sheets import AmoebaRaster

ROOT_RESIDUAL = 1e-12
MAX_ITER = 200
PIXEL_TOLERANCE = 0.02


@dataclass(frozen=True)
class LaurentPolynomial:
    terms: tuple[tuple[tuple[int, int], complex], ...]

    def __post_init__(self):
        exps = [e for e, _ in self.terms]
        if len(set(exps)) != len(exps):
            raise ValueError("exponent pairs must be distinct")
        if any(c == 0 for _, c in self.terms):
            raise ValueError("coefficients must be nonzero")
        if len(self.terms) < 2:
            raise ValueError("need at least two terms; a monomial has no zeros in the torus")
        object.__setattr__(self, "terms", tuple(sorted(self.terms)))

    @classmethod
    def from_mapping(cls, mapping: dict) -> "LaurentPolynomial":
        return cls(tuple(((int(i), int(j)), complex(c)) for (i, j), c in mapping.items() if c != 0))

    def as_dict(self) -> dict[tuple[int, int], complex]:
        return dict(self.terms)

    @property
    def exponents(self) -> np.ndarray:
        return np.array([e for e, _ in self.terms], dtype=np.int64)

    @property
    def w_range(self) -> tuple[int, int]:
        j = self.exponents[:, 1]
        return int(j.min()), int(j.max())

    @property
    def w_degree(self) -> int:
        lo, hi = self.w_range
        return hi - lo

    def __call__(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        return sum(c * z**i * w**j for (i, j), c in self.terms)

    def w_coefficients(self, z) -> np.ndarray:
        """Coefficients of w^{-jmin} p(z, w), ascending powers, shape z.shape + (d+1,)."""
        z = np.asarray(z, dtype=complex)
        lo, hi = self.w_range
        out = np.zeros(z.shape + (hi - lo + 1,), dtype=complex)
        for (i, j), c in self.terms:
            out[..., j - lo] += c * z**i
        return out

    def to_dict(self) -> dict:
        return {"terms": [{"exp": [i, j], "coef": [c.real, c.imag]} for (i, j), c in self.terms]}

    @classmethod
    def from_dict(cls, data: dict) -> "LaurentPolynomial":
        try:
            return cls.from_mapping(
                {tuple(t["exp"]): complex(t["coef"][0], t["coef"][1]) for t in data["terms"]}
            )
        except (KeyError, TypeError, IndexError) as exc:
            raise ParseError(f"malformed polynomial JSON: {exc}", 0) from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def __str__(self) -> str:
        out = ""
        for (i, j), c in self.terms:
            mono = "*".join(s for s in (_power("z", i), _power("w", j)) if s)
            neg = (c.imag == 0 and c.real < 0) or (c.real == 0 and c.imag < 0)
            mag = -c if neg else c
            coef = _fmt_complex(mag)
            if not mono:
                body = coef
            elif mag == 1:
                body = mono
            else:
                body = f"{coef}*{mono}"
            if out:
                out += (" - " if neg else " + ") + body
            else:
                out = ("-" if neg else "") + body
        return out


def _power(v: str, k: int) -> str:
    return "" if k == 0 else v if k == 1 else f"{v}^{k}"


def _fmt_num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def _fmt_complex(c: complex) -> str:
    if c.imag == 0:
        return _fmt_num(c.real)
    if c.real == 0:
        return f"{_fmt_num(c.imag)}i"
    sign = "+" if c.imag >= 0 else "-"
    return f"({_fmt_num(c.real)}{sign}{_fmt_num(abs(c.imag))}i)"


# ---------------------------------------------------------------------------
# Parser: sum of terms  [sign] [coef] [*] (z|w)[^int] ...
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<sym>[zwi+\-*^()]))"
)


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m:
                pos += len(text[pos:]) - len(text[pos:].lstrip())
                raise ParseError(f"unexpected character {text[pos]!r}", pos)
            kind = "num" if m.group("num") else m.group("sym")
            self.toks.append((kind, m.group(kind if kind == "num" else "sym"), m.start(kind if kind == "num" else "sym")))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("eof", "", len(self.text))

    def take(self, kind=None):
        tok = self.peek()
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind!r}", tok[2])
        self.i += 1
        return tok


def _parse_int(lx: _Lexer) -> int:
    sign = 1
    if lx.peek()[0] in ("+", "-"):
        sign = -1 if lx.take()[0] == "-" else 1
    tok = lx.take("num")
    if not re.fullmatch(r"\d+", tok[1]):
        raise ParseError("exponent must be an integer", tok[2])
    return sign * int(tok[1])


def _parse_paren_complex(lx: _Lexer) -> complex:
    lx.take("(")
    val = 0j
    first = True
    while lx.peek()[0] != ")":
        sign = 1
        if lx.peek()[0] in ("+", "-"):
            sign = -1 if lx.take()[0] == "-" else 1
        elif not first:
            tok = lx.peek()
            raise ParseError("expected '+' or '-'", tok[2])
        val += sign * _parse_scalar(lx, required=True)
        first = False
    lx.take(")")
    return val


def _parse_scalar(lx: _Lexer, required: bool = False) -> complex | None:
    tok = lx.peek()
    if tok[0] == "num":
        lx.take()
        x = float(tok[1])
        if lx.peek()[0] == "i":
            lx.take()
            return 1j * x
        return complex(x)
    if tok[0] == "i":
        lx.take()
        return 1j
    if tok[0] == "(":
        return _parse_paren_complex(lx)
    if required:
        raise ParseError("expected a number", tok[2])
    return None


def _parse_term(lx: _Lexer) -> tuple[tuple[int, int], complex]:
    coef = 1 + 0j
    i = j = 0
    seen = False
    while True:
        tok = lx.peek()
        if tok[0] in ("num", "i", "("):
            coef *= _parse_scalar(lx)
        elif tok[0] in ("z", "w"):
            lx.take()
            k = 1
            if lx.peek()[0] == "^":
                lx.take()
                k = _parse_int(lx)
            if tok[0] == "z":
                i += k
            else:
                j += k
        else:
            if not seen:
                raise ParseError("expected a term", tok[2])
            return (i, j), coef
        seen = True
        if lx.peek()[0] == "*":
            lx.take()
            if lx.peek()[0] not in ("num", "i", "(", "z", "w"):
                tok = lx.peek()
                raise ParseError("expected a factor", tok[2])


def parse_laurent(text: str) -> LaurentPolynomial:
    """Parse ``c * z^i * w^j`` sums; like terms are collected."""
    lx = _Lexer(text)
    acc: dict[tuple[int, int], complex] = {}
    first = True
    while lx.peek()[0] != "eof":
        sign = 1
        if lx.peek()[0] in ("+", "-"):
            sign = -1 if lx.take()[0] == "-" else 1
        elif not first:
            tok = lx.peek()
            raise ParseError("expected '+' or '-'", tok[2])
        e, c = _parse_term(lx)
        acc[e] = acc.get(e, 0) + sign * c
        first = False
    if first:
        raise ParseError("empty polynomial", 0)
    acc = {e: c for e, c in acc.items() if c != 0}
    if not acc:
        raise ParseError("all terms cancel", 0)
    if len(acc) < 2:
        raise ParseError("a single monomial has no zeros in the torus", 0)
    return LaurentPolynomial.from_mapping(acc)


# ---------------------------------------------------------------------------
# Newton polygon
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LatticePolygon:
    vertices: tuple[tuple[int, int], ...]

    @property
    def area(self) -> float:
        return polygon_area(self)


def _cross(o, a, b) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> tuple[tuple[int, int], ...]:
    pts = sorted(set((int(x), int(y)) for x, y in points))
    if len(pts) <= 2:
        return tuple(pts)
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 or all(_cross(hull[0], hull[1], q) == 0 for q in hull[2:]):
        return (pts[0], pts[-1])
    return tuple(hull)


def newton_polygon(p: LaurentPolynomial) -> LatticePolygon:
    return LatticePolygon(convex_hull(e for e, _ in p.terms))


def polygon_area(poly: LatticePolygon) -> float:
    v = poly.vertices
    if len(v) < 3:
        return 0.0
    twice = sum(v[k][0] * v[(k + 1) % len(v)][1] - v[(k + 1) % len(v)][0] * v[k][1] for k in range(len(v)))
    return float(Fraction(abs(twice), 2))


def pr_bound(p: LaurentPolynomial) -> float:
    return math.pi**2 * polygon_area(newton_polygon(p))


# ---------------------------------------------------------------------------
# Univariate roots (Aberth-Ehrlich, batched)
# ---------------------------------------------------------------------------


def _horner(coef: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """p, p' and sum |a_k||z|^k for ascending coefficients (B, d+1) at z (B, m)."""
    p = np.zeros(z.shape, dtype=complex)
    dp = np.zeros(z.shape, dtype=complex)
    scale = np.zeros(z.shape)
    az = np.abs(z)
    for k in range(coef.shape[1] - 1, -1, -1):
        dp = dp * z + p
        p = p * z + coef[:, k : k + 1]
        scale = scale * az + np.abs(coef[:, k : k + 1])
    return p, dp, scale


def _initial_guess(coef: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
    d = coef.shape[1] - 1
    r = np.abs(coef[:, :1] / coef[:, -1:]) ** (1.0 / d)
    r = np.where((r > 0) & np.isfinite(r), r, 1.0)
    phase = 0.4 if rng is None else rng.uniform(0, 2 * np.pi)
    ang = 2 * np.pi * np.arange(d) / d + phase
    z = r * np.exp(1j * ang)[None, :]
    if rng is not None:
        z = z * (1 + 0.1 * rng.standard_normal(z.shape))
    return z


def aberth(coef: np.ndarray, init: np.ndarray | None = None, max_iter: int = MAX_ITER):
    """Simultaneous roots of many polynomials (rows of ascending ``coef``).

    Returns (roots, converged) where converged means every root of the row
    has scaled residual |p| / sum |a_k||z|^k below ROOT_RESIDUAL.
    """
    coef = np.asarray(coef, dtype=complex)
    d = coef.shape[1] - 1
    z = _initial_guess(coef) if init is None else np.array(init, dtype=complex)
    done = np.zeros(coef.shape[0], dtype=bool)
    eye = np.eye(d, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(~done)
        if idx.size == 0:
            break
        zi = z[idx]
        p, dp, scale = _horner(coef[idx], zi)
        res = np.abs(p) <= ROOT_RESIDUAL * scale
        ok = res.all(axis=1)
        done[idx[ok]] = True
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            diff = zi[:, :, None] - zi[:, None, :]
            inv = np.where(eye, 0, 1.0 / np.where(eye, 1, diff))
            s = inv.sum(axis=2)
            step = ratio / (1 - ratio * s)
        step = np.where(res | ~np.isfinite(step), 0, step)
        z[idx[~ok]] = zi[~ok] - step[~ok]
    p, _, scale = _horner(coef, z)
    return z, np.all(np.abs(p) <= ROOT_RESIDUAL * scale, axis=1)


def _roots_with_restart(coef: np.ndarray, seed: int = 0, restarts: int = 5):
    z, ok = aberth(coef)
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        if ok.all():
            break
        bad = np.flatnonzero(~ok)
        zb, okb = aberth(coef[bad], _initial_guess(coef[bad], rng))
        z[bad] = zb
        ok[bad] = okb
    return z, ok


class FiberRoots(list):
    """Roots in C* of p(z0, w); ``degree_drop`` counts roots lost at this z0."""

    degree_drop: int = 0
    expected: int = 0


def _trim(coef: np.ndarray, tol: float = 1e-14) -> tuple[np.ndarray, int, int]:
    """Strip vanishing leading and trailing coefficients of one polynomial."""
    scale = np.max(np.abs(coef))
    nz = np.flatnonzero(np.abs(coef) > tol * scale) if scale > 0 else np.array([], dtype=int)
    if nz.size == 0:
        return coef[:0], coef.size - 1, 0
    lo, hi = int(nz[0]), int(nz[-1])
    return coef[lo : hi + 1], coef.size - 1 - hi, lo


def fiber_roots(p: LaurentPolynomial, z_value: complex, seed: int = 0) -> FiberRoots:
    if p.w_degree <= 0:
        raise ValueError("polynomial has no w-dependence; fibers are empty or everything")
    coef = p.w_coefficients(np.array([complex(z_value)]))[0]
    trimmed, top_drop, zeros = _trim(coef)
    out = FiberRoots()
    out.expected = p.w_degree
    out.degree_drop = top_drop + zeros
    if trimmed.size >= 2:
        z, ok = _roots_with_restart(trimmed[None, :], seed)
        if not ok[0]:
            raise ArithmeticError(f"root solver did not converge at z = {z_value}")
        out.extend(sorted(z[0].tolist(), key=lambda c: (c.real, c.imag)))
    return out


# ---------------------------------------------------------------------------
# Raster
# ---------------------------------------------------------------------------


def default_window(p: LaurentPolynomial) -> tuple[float, float, float, float]:
    e = p.exponents
    spread = int(max(e[:, 0].max() - e[:, 0].min(), e[:, 1].max() - e[:, 1].min()))
    L = 3.0 + spread
    return (-L, L, -L, L)


def _track(p: LaurentPolynomial, x: np.ndarray, angles: int, seed: int):
    """Track all w-roots around |z| = e^x for a batch of x values.

    Returns log|w| samples of shape (angles + 1, B, d) along continuous
    branches and a mask of fibers that were tracked successfully.
    """
    B = x.size
    d = p.w_degree
    radius = np.exp(x)
    theta = 2 * np.pi * np.arange(angles + 1) / angles

    def coef_at(rows, t):
        return p.w_coefficients(radius[rows] * np.exp(1j * t))

    c0 = coef_at(np.arange(B), 0.0)
    good = np.abs(c0[:, -1]) > 1e-13 * np.abs(c0).max(axis=1)
    good &= np.abs(c0[:, 0]) > 1e-13 * np.abs(c0).max(axis=1)
    roots, ok = _roots_with_restart(np.where(good[:, None], c0, 1.0), seed)
    good &= ok
    out = np.empty((angles + 1, B, d))
    out[0] = np.log(np.abs(roots))

    def advance(rows, w, t0, t1, depth):
        c = coef_at(rows, t1)
        lead = np.abs(c[:, -1]) > 1e-13 * np.abs(c).max(axis=1)
        new, conv = aberth(np.where(lead[:, None], c, 1.0), w, max_iter=50)
        dist = np.abs(new - w)
        if d > 1:
            sep = np.abs(w[:, :, None] - w[:, None, :])
            sep[:, np.arange(d), np.arange(d)] = np.inf
            tracked = np.all(dist < sep.min(axis=2) / 3, axis=1)
        else:
            tracked = np.ones(rows.size, dtype=bool)
        fine = conv & lead & tracked
        if depth == 0 or fine.all():
            return new, fine
        bad = np.flatnonzero(~fine)
        tm = 0.5 * (t0 + t1)
        mid, okm = advance(rows[bad], w[bad], t0, tm, depth - 1)
        end, oke = advance(rows[bad], mid, tm, t1, depth - 1)
        new[bad] = end
        fine[bad] = okm & oke
        return new, fine

    rows = np.arange(B)
    w = roots
    for k in range(angles):
        active = rows[good]
        if active.size == 0:
            break
        nw, fine = advance(active, w[active], theta[k], theta[k + 1], 6)
        w[active] = nw
        good[active[~fine]] = False
        out[k + 1] = np.log(np.abs(w))
    return out, good


def _mark_columns(vals: np.ndarray, y0: float, y1: float, resolution: int) -> np.ndarray:
    """Count of intervals [v_k, v_k+1] covering each row centre; shape (B, resolution)."""
    h = (y1 - y0) / resolution
    a = np.minimum(vals[:-1], vals[1:])
    b = np.maximum(vals[:-1], vals[1:])
    # rows r have centre y1 - (r + 1/2) h, decreasing in r
    r_lo = np.ceil((y1 - b) / h - 0.5).astype(np.int64)
    r_hi = np.floor((y1 - a) / h - 0.5).astype(np.int64)
    r_lo = np.clip(r_lo, 0, resolution)
    r_hi = np.clip(r_hi, -1, resolution - 1)
    B = vals.shape[1]
    acc = np.zeros((B, resolution + 1), dtype=np.int64)
    col = np.broadcast_to(np.arange(B)[None, :, None], r_lo.shape)
    keep = r_hi >= r_lo
    np.add.at(acc, (col[keep], r_lo[keep]), 1)
    np.add.at(acc, (col[keep], r_hi[keep] + 1), -1)
    return np.cumsum(acc[:, :-1], axis=1) > 0


def fiber_positions(fibers: int, resolution: int) -> np.ndarray:
    """Fractions of the window width; nested when ``fibers`` doubles and
    equal to pixel-column centres when ``fibers == resolution``."""
    return np.mod(np.arange(fibers) / fibers + 0.5 / resolution, 1.0)


def raster_amoeba(
    p: LaurentPolynomial,
    window=None,
    resolution: int = 600,
    fibers: int | None = None,
    angles: int | None = None,
    seed: int = 0,
    chunk: int = 64,
) -> AmoebaRaster:
    window = default_window(p) if window is None else tuple(float(v) for v in window)
    x0, x1, y0, y1 = window
    if not (x1 > x0 and y1 > y0) or resolution < 1:
        raise ValueError("window must be nonempty")
    fibers = resolution if fibers is None else int(fibers)
    angles = resolution if angles is None else int(angles)
    img = np.zeros((resolution, resolution), dtype=bool)
    diag = {"fibers": fibers, "angles": angles, "skipped_fibers": 0}
    if p.w_degree == 0:
        return AmoebaRaster(window, resolution, covered=img, area_estimate=0.0, diagnostics=diag)
    u = fiber_positions(fibers, resolution)
    xs = x0 + u * (x1 - x0)
    cols = np.minimum((u * resolution).astype(np.int64), resolution - 1)
    starts = list(range(0, fibers, chunk))

    def job(s):
        vals, good = _track(p, xs[s : s + chunk], angles, seed + s)
        marks = _mark_columns(vals, y0, y1, resolution)
        return marks & good[:, None], int((~good).sum())

    workers = worker_count()
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, starts))
    else:
        results = [job(s) for s in starts]
    for s, (marks, skipped) in zip(starts, results):
        for k in range(marks.shape[0]):
            img[:, cols[s + k]] |= marks[k]
        diag["skipped_fibers"] += skipped
    pix = (x1 - x0) * (y1 - y0) / resolution**2
    return AmoebaRaster(window, resolution, covered=img, area_estimate=float(img.sum()) * pix, diagnostics=diag)


@dataclass
class PRReport:
    area_estimate: float
    pr_bound: float
    passed: bool
    raster: AmoebaRaster = field(repr=False)

    @property
    def ratio(self) -> float | None:
        return self.area_estimate / self.pr_bound if self.pr_bound > 0 else None

    def to_dict(self) -> dict:
        return {
            "area_estimate": self.area_estimate,
            "pr_bound": self.pr_bound,
            "ratio": self.ratio,
            "pass": self.passed,
            "raster": self.raster.to_dict(),
        }


def check_pr(p: LaurentPolynomial, **raster_options) -> PRReport:
    """Compare a raster area estimate with pi^2 times the Newton polygon area."""
    r = raster_amoeba(p, **raster_options)
    bound = pr_bound(p)
    return PRReport(r.area_estimate, bound, r.area_estimate <= bound * (1 + PIXEL_TOLERANCE), r)
