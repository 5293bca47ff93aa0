"""Pullback area density of Log o f for a rational curve f: C -> (C*)^n.

With g_j = f_j'/f_j, the (j, k) coordinate-plane Jacobian of Log f, measured
against the volume form ``i dz ^ dz-bar`` (= 2 dx dy), is

    i det(d_z Log f_jk, d_zbar Log f_jk) = -(1/2) Im(g_j * conj(g_k)),

and the density is the root-sum-square over all pairs j < k.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .ratfun import DomainError, RationalCurve

DEGENERACY_THRESHOLD = 1e-12
DEGENERACY_SAMPLES = 64


@dataclass(frozen=True)
class DensityValue:
    value: float
    pair_terms: tuple[tuple[tuple[int, int], float], ...]


def _check_domain(f: RationalCurve, z) -> None:
    if f.support_array.size == 0:
        return
    hit = np.asarray(z, dtype=complex)[..., None] == f.support_array
    if np.any(hit):
        idx = np.argwhere(hit)[0]
        a = complex(f.support_array[idx[-1]])
        raise DomainError(f"density undefined on the singular support point {a!r}", a)


def pairs(n: int) -> list[tuple[int, int]]:
    return list(combinations(range(n), 2))


def pair_determinants(f: RationalCurve, z) -> np.ndarray:
    """All pair determinants, shape ``z.shape + (C(n,2),)``, pairs in (j,k) order.

    No domain check; support points produce nan.
    """
    g = f.log_derivatives(z)
    js, ks = zip(*pairs(f.n))
    return -0.5 * np.imag(g[..., list(js)] * np.conj(g[..., list(ks)]))


def density_values(f: RationalCurve, z) -> np.ndarray:
    """Vectorized density magnitude (no domain check)."""
    g = f.log_derivatives(z)
    acc = np.zeros(np.shape(z), dtype=float)
    for j, k in pairs(f.n):
        d = np.imag(g[..., j] * np.conj(g[..., k]))
        acc = acc + d * d
    return 0.5 * np.sqrt(acc)


def pair_determinant(f: RationalCurve, j: int, k: int, z: complex) -> float:
    if not 0 <= j < f.n or not 0 <= k < f.n or j == k:
        raise IndexError(f"invalid component pair ({j}, {k}) for n={f.n}")
    _check_domain(f, z)
    gj = f.components[j].log_derivative(z)
    gk = f.components[k].log_derivative(z)
    return float(-0.5 * (gj * np.conj(gk)).imag)


def density(f: RationalCurve, z: complex) -> DensityValue:
    _check_domain(f, z)
    g = f.log_derivatives(complex(z))
    terms = []
    acc = 0.0
    for j, k in pairs(f.n):
        d = float(-0.5 * (g[j] * np.conj(g[k])).imag)
        terms.append(((j, k), d))
        acc += d * d
    return DensityValue(float(np.sqrt(acc)), tuple(terms))


def _sample_disk(rng: np.random.Generator, count: int, center: complex, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(count))
    t = 2 * np.pi * rng.random(count)
    return center + r * np.exp(1j * t)


def support_radius(f: RationalCurve) -> float:
    s = f.support_array
    return float(np.max(np.abs(s))) if s.size else 0.0


def min_support_distance(points, support: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=complex)
    if support.size == 0:
        return np.full(points.shape, np.inf)
    return np.min(np.abs(points[..., None] - support), axis=-1)


def is_degenerate(f: RationalCurve, samples: int = DEGENERACY_SAMPLES, seed: int = 0) -> bool:
    """True when the density vanishes at every sampled point.

    The threshold is relative to ``sum |g_j|^2`` so that rounding in the
    partial-fraction sums near the support is not mistaken for signal.
    """
    if samples < 16:
        raise ValueError("need at least 16 samples")
    rng = np.random.default_rng(seed)
    radius = 2.0 + support_radius(f)
    keep = 1e-3 * radius
    pts: list[complex] = []
    while len(pts) < samples:
        cand = _sample_disk(rng, 2 * samples, 0j, radius)
        cand = cand[min_support_distance(cand, f.support_array) > keep]
        pts.extend(cand[: samples - len(pts)].tolist())
    z = np.array(pts)
    g = f.log_derivatives(z)
    scale = np.maximum(1.0, np.sum(np.abs(g) ** 2, axis=-1))
    return bool(np.all(density_values(f, z) < DEGENERACY_THRESHOLD * scale))


def critical_locus_sample(
    f: RationalCurve,
    window: tuple[float, float, float, float],
    resolution: int | tuple[int, int] = 400,
) -> np.ndarray:
    """Grid points on or next to the critical set of Log f.

    A grid point is flagged when every pair determinant either vanishes
    there (below 1e-9 times the median density of the window) or changes
    sign towards the right or upper neighbour, i.e. all Jacobian minors have
    a common zero within one grid step. Points within two grid steps of the
    singular support are skipped.
    """
    x0, x1, y0, y1 = map(float, window)
    nx, ny = (resolution, resolution) if np.ndim(resolution) == 0 else resolution
    if not (x1 > x0 and y1 > y0):
        raise ValueError("window must have positive area")
    if nx < 2 or ny < 2:
        raise ValueError("resolution must be at least 2 per axis")
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    z = xs[None, :] + 1j * ys[:, None]
    step = max(xs[1] - xs[0], ys[1] - ys[0])
    near = min_support_distance(z, f.support_array) <= 2 * step
    with np.errstate(divide="ignore", invalid="ignore"):
        dets = pair_determinants(f, z)
    dets[near] = 1.0
    dens = np.sqrt(np.sum(dets**2, axis=-1))
    eps = 1e-9 * float(np.median(dens[~near])) if np.any(~near) else 0.0

    sgn = np.sign(dets)
    sgn[near] = 0.0
    crossing = np.abs(dets) <= eps
    right = np.zeros_like(crossing)
    right[:, :-1] = sgn[:, :-1] * sgn[:, 1:] < 0
    up = np.zeros_like(crossing)
    up[:-1, :] = sgn[:-1, :] * sgn[1:, :] < 0
    flagged = np.all(crossing | right | up, axis=-1) & ~near
    return z[flagged]
