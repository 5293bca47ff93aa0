"""Globally adaptive tensor Gauss-Kronrod cubature over rectangles.

Each cell is integrated with the 15x15 Kronrod product rule; the embedded
7x7 Gauss product rule supplies the error estimate ``|K - G|``. Cells with
the largest errors are bisected in both directions until the summed error
meets the tolerance or the evaluation budget runs out. Several integrands
("pieces") share one refinement pool so the tolerance applies to the total.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])  # 15 nodes on [-1, 1]
K_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
G_WEIGHTS = np.zeros(15)
G_WEIGHTS[1::2] = np.concatenate([_WG[:-1], _WG[::-1]])

# tensor weights on the 225-point grid (row = first coordinate)
_K2 = np.outer(K_WEIGHTS, K_WEIGHTS).ravel()
_G2 = np.outer(G_WEIGHTS, G_WEIGHTS).ravel()
_U = np.repeat(NODES, 15)
_V = np.tile(NODES, 15)
POINTS_PER_CELL = 225

Integrand = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Piece:
    """A rectangle ``[u0, u1] x [v0, v1]`` and a vectorized integrand on it."""

    name: str
    integrand: Integrand
    rect: tuple[float, float, float, float]
    splits: tuple[int, int] = (1, 1)


@dataclass(frozen=True)
class CubatureResult:
    values: tuple[float, ...]
    errors: tuple[float, ...]
    cells: int
    evaluations: int
    converged: bool


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("AMOEBA_THREADS", "1")))
    except ValueError:
        return 1


def _rule(integrand: Integrand, u0, u1, v0, v1) -> tuple[np.ndarray, np.ndarray]:
    hu = 0.5 * (u1 - u0)
    hv = 0.5 * (v1 - v0)
    cu = 0.5 * (u1 + u0)
    cv = 0.5 * (v1 + v0)
    u = cu[:, None] + hu[:, None] * _U
    v = cv[:, None] + hv[:, None] * _V
    vals = np.asarray(integrand(u, v), dtype=float)
    vals = np.where(np.isfinite(vals), vals, 0.0)
    area = hu * hv
    k = area * (vals @ _K2)
    g = area * (vals @ _G2)
    return k, np.abs(k - g)


def _evaluate(pieces: Sequence[Piece], pid, u0, u1, v0, v1, chunk: int, workers: int):
    jobs = []
    for p in np.unique(pid):
        idx = np.flatnonzero(pid == p)
        for s in range(0, idx.size, chunk):
            jobs.append((int(p), idx[s : s + chunk]))
    val = np.empty(pid.size)
    err = np.empty(pid.size)

    def run(job):
        p, idx = job
        return _rule(pieces[p].integrand, u0[idx], u1[idx], v0[idx], v1[idx])

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    # gather-then-write keeps the result independent of scheduling
    for (p, idx), (k, e) in zip(jobs, results):
        val[idx] = k
        err[idx] = e
    return val, err


def integrate(
    pieces: Sequence[Piece],
    rel_tol: float,
    abs_tol: float = 0.0,
    max_evals: int = 10_000_000,
    workers: int | None = None,
    chunk: int = 2000,
) -> CubatureResult:
    if workers is None:
        workers = worker_count()
    pid, u0, u1, v0, v1 = [], [], [], [], []
    for i, piece in enumerate(pieces):
        a, b, c, d = piece.rect
        nu, nv = piece.splits
        eu = np.linspace(a, b, nu + 1)
        ev = np.linspace(c, d, nv + 1)
        for iu in range(nu):
            for iv in range(nv):
                pid.append(i)
                u0.append(eu[iu]); u1.append(eu[iu + 1])
                v0.append(ev[iv]); v1.append(ev[iv + 1])
    pid = np.array(pid, dtype=int)
    u0, u1, v0, v1 = (np.array(x, dtype=float) for x in (u0, u1, v0, v1))
    val, err = _evaluate(pieces, pid, u0, u1, v0, v1, chunk, workers)
    evals = pid.size * POINTS_PER_CELL
    converged = False

    while True:
        total = float(np.sum(val))
        err_total = float(np.sum(err))
        tol = max(rel_tol * abs(total), abs_tol)
        if err_total <= tol:
            converged = True
            break
        order = np.argsort(-err, kind="stable")
        remaining = err_total - np.cumsum(err[order])
        # smallest prefix whose perfect refinement would meet half the tolerance
        count = int(np.searchsorted(-remaining, -0.5 * tol)) + 1
        count = min(count, order.size)
        if evals + 4 * count * POINTS_PER_CELL > max_evals:
            count = (max_evals - evals) // (4 * POINTS_PER_CELL)
            if count <= 0:
                break
        sel = order[:count]
        keep = np.ones(pid.size, dtype=bool)
        keep[sel] = False
        su0, su1, sv0, sv1 = u0[sel], u1[sel], v0[sel], v1[sel]
        um = 0.5 * (su0 + su1)
        vm = 0.5 * (sv0 + sv1)
        cp = np.repeat(pid[sel], 4)
        cu0 = np.stack([su0, su0, um, um], axis=1).ravel()
        cu1 = np.stack([um, um, su1, su1], axis=1).ravel()
        cv0 = np.stack([sv0, vm, sv0, vm], axis=1).ravel()
        cv1 = np.stack([vm, sv1, vm, sv1], axis=1).ravel()
        cval, cerr = _evaluate(pieces, cp, cu0, cu1, cv0, cv1, chunk, workers)
        evals += cp.size * POINTS_PER_CELL
        pid = np.concatenate([pid[keep], cp])
        u0 = np.concatenate([u0[keep], cu0])
        u1 = np.concatenate([u1[keep], cu1])
        v0 = np.concatenate([v0[keep], cv0])
        v1 = np.concatenate([v1[keep], cv1])
        val = np.concatenate([val[keep], cval])
        err = np.concatenate([err[keep], cerr])

    # canonical order: piece, then cell position
    order = np.lexsort((v0, u0, pid))
    values, errors = [], []
    for i in range(len(pieces)):
        sel = order[pid[order] == i]
        values.append(math.fsum(val[sel].tolist()))
        errors.append(math.fsum(err[sel].tolist()))
    return CubatureResult(tuple(values), tuple(errors), int(pid.size), int(evals), converged)
