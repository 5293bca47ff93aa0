"""Weighted amoeba volume vol2 = integral of the Log-pullback density over C.

The plane is split by a smooth partition of unity into

* one polar chart per singular support point ``z = a + r e^{i theta}``, where
  ``r * density`` is bounded because the density has simple poles there;
* an exterior chart ``z = e^{i phi} / s`` in which the area element
  ``s^-3 ds dphi`` exactly absorbs the ``|z|^-3`` decay of the density;
* a bulk square carrying the remaining weight, with no singularities.

Transition bands are aligned with dyadic cell boundaries of the charts, so
the only non-smooth features left for the adaptive rule are the kinks of
``|det|`` along the critical locus.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .cubature import Piece, integrate
from .density import density_values, is_degenerate, support_radius
from .ratfun import RationalCurve

DEFAULT_REL_TOL = 1e-6
DEFAULT_MAX_EVALS = 10_000_000
DISK_RADIUS_CAP = 0.5
# i dz ^ dz-bar = 2 dx dy
MEASURE = 2.0


class DegenerateCurveError(ValueError):
    """The curve lies in a one-dimensional subtorus; its amoeba is a line."""


class IndeterminateError(ArithmeticError):
    """A decay fit had no nonzero samples to work with."""


@dataclass(frozen=True)
class QuadratureParams:
    rel_tol: float = DEFAULT_REL_TOL
    max_evals: int = DEFAULT_MAX_EVALS
    disk_radius_cap: float = DISK_RADIUS_CAP
    workers: int | None = None

    def __post_init__(self):
        if not 1e-10 < self.rel_tol < 1e-1:
            raise ValueError(f"rel_tol must lie in (1e-10, 1e-1), got {self.rel_tol}")
        if self.max_evals <= 0 or self.disk_radius_cap <= 0:
            raise ValueError("budget and radius cap must be positive")


@dataclass(frozen=True)
class Decomposition:
    singular_disks: tuple[tuple[complex, float], ...]
    r_out: float

    @property
    def bulk_box(self) -> tuple[float, float, float, float]:
        return (-self.r_out, self.r_out, -self.r_out, self.r_out)

    @property
    def exterior_radius(self) -> float:
        """Radius in the inverted coordinate w = 1/z of the region |z| > r_out."""
        return 1.0 / self.r_out


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    cells_evaluated: int
    piece_breakdown: tuple[tuple[str, float], ...] = ()
    evaluations: int = 0
    converged: bool = True
    degenerate: bool = False
    rel_tol: float = DEFAULT_REL_TOL

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "error": self.error_estimate,
            "cells": self.cells_evaluated,
            "pieces": [{"name": k, "value": v} for k, v in self.piece_breakdown],
            "evaluations": self.evaluations,
            "converged": self.converged,
            "degenerate": self.degenerate,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def smoothstep(u):
    """C^3 ramp from 0 (u <= 0) to 1 (u >= 1)."""
    u = np.clip(u, 0.0, 1.0)
    return u**4 * (35 - 84 * u + 70 * u**2 - 20 * u**3)


def _inner_weight(r, radius):
    # 1 on r <= radius/2, 0 on r >= radius
    return 1.0 - smoothstep(2.0 * r / radius - 1.0)


def _outer_weight(absz, r_out):
    # 0 on |z| <= r_out/2, 1 on |z| >= r_out
    return smoothstep(2.0 * absz / r_out - 1.0)


def decompose_plane(f: RationalCurve, params: QuadratureParams | None = None, check: bool = True) -> Decomposition:
    params = params or QuadratureParams()
    support = f.support_array
    if support.size == 0:
        raise DegenerateCurveError("curve has empty singular support (constant map)")
    if check and is_degenerate(f):
        raise DegenerateCurveError(
            "curve is contained in a one-dimensional subtorus; the density vanishes identically"
        )
    if support.size > 1:
        d = np.abs(support[:, None] - support[None, :])
        np.fill_diagonal(d, np.inf)
        sep = float(d.min())
    else:
        sep = math.inf
    radius = min(params.disk_radius_cap, sep / 3.0)
    r_out = 2.0 * (1.0 + support_radius(f))
    return Decomposition(tuple((complex(a), radius) for a in support), r_out)


def _pieces(f: RationalCurve, dec: Decomposition) -> list[Piece]:
    pieces = []
    centers = np.array([a for a, _ in dec.singular_disks])
    radius = dec.singular_disks[0][1]
    r_out = dec.r_out

    for a, rho in dec.singular_disks:
        def disk(r, t, a=a, rho=rho):
            z = a + r * np.exp(1j * t)
            return MEASURE * density_values(f, z) * r * _inner_weight(r, rho)

        pieces.append(Piece(f"disk[{a.real!r},{a.imag!r}]", disk, (0.0, rho, 0.0, 2 * np.pi), (2, 8)))

    def bulk(x, y):
        z = x + 1j * y
        w = 1.0 - _outer_weight(np.abs(z), r_out)
        dist = np.abs(z[..., None] - centers)
        w = w - np.sum(_inner_weight(dist, radius), axis=-1)
        active = w > 0
        out = np.zeros(z.shape)
        with np.errstate(divide="ignore", invalid="ignore"):
            out[active] = MEASURE * density_values(f, z[active]) * w[active]
        return out

    pieces.append(Piece("bulk", bulk, dec.bulk_box, (4, 4)))

    def exterior(s, t):
        z = np.exp(1j * t) / s
        return MEASURE * density_values(f, z) * _outer_weight(1.0 / s, r_out) / s**3

    pieces.append(Piece("exterior", exterior, (0.0, 2.0 / r_out, 0.0, 2 * np.pi), (2, 8)))
    return pieces


def vol2(f: RationalCurve, rel_tol: float | None = None, params: QuadratureParams | None = None) -> QuadratureResult:
    """Weighted volume of the amoeba: each point counted with its number of preimages."""
    params = params or QuadratureParams()
    if rel_tol is not None:
        params = replace(params, rel_tol=rel_tol)
    if f.support_array.size == 0 or is_degenerate(f):
        return QuadratureResult(0.0, 0.0, 0, (), 0, True, True, params.rel_tol)
    dec = decompose_plane(f, params, check=False)
    pieces = _pieces(f, dec)
    res = integrate(pieces, params.rel_tol, max_evals=params.max_evals, workers=params.workers)
    value = math.fsum(res.values)
    return QuadratureResult(
        value=value,
        error_estimate=math.fsum(res.errors),
        cells_evaluated=res.cells,
        piece_breakdown=tuple((p.name, v) for p, v in zip(pieces, res.values)),
        evaluations=res.evaluations,
        converged=res.converged,
        degenerate=False,
        rel_tol=params.rel_tol,
    )


def _closest_support(f: RationalCurve, a: complex) -> complex:
    s = f.support_array
    if s.size == 0:
        raise ValueError("curve has no singular support")
    i = int(np.argmin(np.abs(s - a)))
    if abs(s[i] - a) > 0:
        raise ValueError(f"{a!r} is not a singular support point")
    return complex(s[i])


def local_mass(f: RationalCurve, a: complex, delta: float, rel_tol: float = 1e-8) -> float:
    """Integral of the density over the disk |z - a| < delta (a is a support point)."""
    a = _closest_support(f, complex(a))
    dec = decompose_plane(f, check=False)
    radius = dec.singular_disks[0][1]
    if not 0 < delta < radius:
        raise ValueError(f"delta must lie in (0, {radius}) for this curve")
    if is_degenerate(f):
        return 0.0

    def disk(r, t):
        return MEASURE * density_values(f, a + r * np.exp(1j * t)) * r

    res = integrate([Piece("local", disk, (0.0, delta, 0.0, 2 * np.pi), (1, 8))], rel_tol, abs_tol=1e-300)
    return res.values[0]


def tail_mass(f: RationalCurve, R: float, rel_tol: float = 1e-8) -> float:
    """Integral of the density over |z| > R, computed in the inverted chart."""
    r_out = 2.0 * (1.0 + support_radius(f))
    if R < r_out:
        raise ValueError(f"R must be at least r_out = {r_out}")
    if is_degenerate(f):
        return 0.0

    def ext(s, t):
        return MEASURE * density_values(f, np.exp(1j * t) / s) / s**3

    res = integrate([Piece("tail", ext, (0.0, 1.0 / R, 0.0, 2 * np.pi), (1, 8))], rel_tol, abs_tol=1e-300)
    return res.values[0]


def decay_exponent(
    f: RationalCurve,
    theta: float,
    R_range: tuple[float, float] = (1e2, 1e5),
    samples: int = 32,
) -> float:
    """Least-squares slope of log(density) against log(R) along the ray arg z = theta."""
    R = np.geomspace(R_range[0], R_range[1], samples)
    d = density_values(f, R * np.exp(1j * theta))
    ok = d > 0
    if np.count_nonzero(ok) < 2:
        raise IndeterminateError(f"density vanishes along the ray theta={theta}")
    slope, _ = np.polyfit(np.log(R[ok]), np.log(d[ok]), 1)
    return float(slope)


def loglog_slope(xs, ys) -> float:
    slope, _ = np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)
    return float(slope)


@dataclass
class DiagnosticReport:
    """Pole integrability and decay at infinity for one curve."""

    decay_slopes: list[float] = field(default_factory=list)
    local_ratios: dict[str, list[float]] = field(default_factory=dict)
    tail_radii: list[float] = field(default_factory=list)
    tail_values: list[float] = field(default_factory=list)
    tail_slope: float = math.nan

    @property
    def decay_ok(self) -> bool:
        return bool(self.decay_slopes) and max(self.decay_slopes) <= -2.9

    @property
    def local_ok(self) -> bool:
        return all(max(r) / min(r) - 1.0 < 0.5 for r in self.local_ratios.values() if min(r) > 0)

    @property
    def tail_ok(self) -> bool:
        # tail = O(1/R): R * tail(R) may not grow by 50% over the ladder
        scaled = [R * t for R, t in zip(self.tail_radii, self.tail_values)]
        return bool(scaled) and scaled[0] > 0 and max(scaled) / scaled[0] - 1.0 < 0.5

    def to_dict(self) -> dict:
        return {
            "decay_slopes": self.decay_slopes,
            "local_mass_over_delta": self.local_ratios,
            "tail_radii": self.tail_radii,
            "tail_values": self.tail_values,
            "tail_slope": self.tail_slope,
            "decay_ok": self.decay_ok,
            "local_ok": self.local_ok,
            "tail_ok": self.tail_ok,
        }


def diagnose(
    f: RationalCurve,
    rays: int = 5,
    seed: int = 0,
    deltas: tuple[float, ...] = (1e-1, 1e-2, 1e-3),
) -> DiagnosticReport:
    if is_degenerate(f):
        raise DegenerateCurveError("curve is contained in a one-dimensional subtorus")
    rng = np.random.default_rng(seed)
    rep = DiagnosticReport()
    while len(rep.decay_slopes) < rays:
        try:
            rep.decay_slopes.append(decay_exponent(f, float(rng.uniform(0, 2 * np.pi))))
        except IndeterminateError:
            continue
    dec = decompose_plane(f, check=False)
    radius = dec.singular_disks[0][1]
    usable = [d for d in deltas if d < radius] or [radius * 0.5 * 10.0**-k for k in range(3)]
    for a, _ in dec.singular_disks:
        rep.local_ratios[repr(a)] = [local_mass(f, a, d) / d for d in usable]
    rep.tail_radii = [dec.r_out * 10.0**k for k in range(3)]
    rep.tail_values = [tail_mass(f, R) for R in rep.tail_radii]
    rep.tail_slope = loglog_slope(rep.tail_radii, rep.tail_values)
    return rep
