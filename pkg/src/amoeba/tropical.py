"""End directions of a rational-curve amoeba and the Hausdorff distance.

Near a support point ``a`` every coordinate behaves like ``(z - a)^u_j`` with
``u_j`` the order of f_j at a, so ``Log f ~ log|z - a| * u`` runs off to
infinity along ``-u``. Near ``z = infinity`` the exponents are the degrees.
These rational directions are the points of the logarithmic limit set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import NamedTuple, Sequence

import numpy as np
from scipy.spatial.distance import directed_hausdorff as _directed

from .density import is_degenerate, min_support_distance, support_radius
from .ratfun import INFINITY, RationalCurve


@dataclass(frozen=True)
class DirectionVector:
    """One point of the logarithmic limit set, with every end that produces it."""

    sources: tuple
    integer_rep: tuple[int, ...]

    @property
    def source(self):
        return self.sources[0]

    @property
    def direction(self) -> np.ndarray:
        v = np.asarray(self.integer_rep, dtype=float)
        return v / np.linalg.norm(v)

    def to_dict(self) -> dict:
        return {
            "source": [_source_json(s) for s in self.sources] if len(self.sources) > 1 else _source_json(self.source),
            "int_dir": list(self.integer_rep),
            "unit": self.direction.tolist(),
        }


def _source_json(s):
    return "inf" if s is INFINITY else [complex(s).real, complex(s).imag]


class LimitSet(list):
    """List of DirectionVector; ``degenerate`` marks a curve inside a subtorus."""

    degenerate: bool = False


def primitive(v: Sequence[int]) -> tuple[int, ...]:
    g = reduce(math.gcd, (abs(int(x)) for x in v), 0)
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    return tuple(int(x) // g for x in v)


def limit_directions(f: RationalCurve) -> LimitSet:
    found: dict[tuple[int, ...], list] = {}
    for a in f.singular_support():
        u = [c.order_at(a) for c in f.components]
        if any(u):
            found.setdefault(primitive([-x for x in u]), []).append(a)
    d = [c.degree for c in f.components]
    if any(d):
        found.setdefault(primitive(d), []).append(INFINITY)
    out = LimitSet(DirectionVector(tuple(src), rep) for rep, src in found.items())
    out.degenerate = f.support_array.size == 0 or is_degenerate(f)
    return out


class EndFit(NamedTuple):
    direction: np.ndarray
    residual: float


def default_t_range(f: RationalCurve, source) -> tuple[float, float]:
    if source is INFINITY:
        scale = 1.0 + support_radius(f)
        return (1e4 * scale, 1e10 * scale)
    others = f.support_array[f.support_array != complex(source)]
    scale = min(1.0, float(np.min(np.abs(others - source)))) if others.size else 1.0
    return (1e-10 * scale, 1e-4 * scale)


def end_asymptote_fit(
    f: RationalCurve,
    end: DirectionVector,
    t_range: tuple[float, float] | None = None,
    source=None,
    samples: int = 64,
    seed: int = 0,
) -> EndFit:
    """Fit the escape direction of Log f along a ray approaching one end."""
    src = end.source if source is None else source
    if src not in end.sources:
        raise ValueError(f"{src!r} is not a source of this end")
    lo, hi = t_range or default_t_range(f, src)
    rng = np.random.default_rng(seed)
    t = np.geomspace(lo, hi, samples)
    if src is not INFINITY:
        t = t[::-1]  # march towards the source
    base = 0j if src is INFINITY else complex(src)
    others = f.support_array if src is INFINITY else f.support_array[f.support_array != base]
    for _ in range(100):
        theta = rng.uniform(0, 2 * np.pi)
        z = base + t * np.exp(1j * theta)
        if np.all(min_support_distance(z, others) > 1e-9 * np.maximum(1.0, np.abs(z))):
            break
    X = f.log_map(z)
    D = np.diff(X, axis=0)
    _, _, vt = np.linalg.svd(D, full_matrices=False)
    v = vt[0]
    if v @ D.sum(axis=0) < 0:
        v = -v
    e = end.direction
    c = float(v @ e)
    return EndFit(v, math.atan2(float(np.linalg.norm(v - c * e)), c))


def directed_hausdorff(A, B) -> float:
    """sup over a in A of the distance from a to B."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.size == 0 or B.size == 0:
        raise ValueError("point sets must be nonempty")
    return float(_directed(A, B)[0])


def hausdorff_distance(A, B) -> float:
    """Symmetric Hausdorff distance between finite point sets in R^n."""
    return max(directed_hausdorff(A, B), directed_hausdorff(B, A))
