"""Gauss-diagram functionals, the writhe, and the Biot-Savart volume term.

Grid mode evaluates a diagram functional exactly on the vertex grid for up
to three chords.  Configurations are cyclically ordered tuples of vertices;
tuples where neighbouring points coincide lie on a boundary face and get
weight 1/2 per coincidence (trapezoid rule), which makes the sums
second-order accurate.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numba
import numpy as np

from .curve import KnotCurve
from .diagrams import ChordDiagram, GaussDiagram, x_diagram
from .energies import DEFAULT_QUAD, QuadratureConfig, half_grid
from .kernels import interleaved_sum, kernel_matrix
from .report import FunctionalReport, combined_error

# the bundled TBB is too old for numba; skip it instead of warning at first use
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

CHORD = GaussDiagram(((1, 2),))
X = x_diagram(2, GaussDiagram)
CHUNK = 65536


@dataclass(frozen=True)
class MCConfig:
    """Monte Carlo settings.

    Parameters
    ----------
    samples : int
        Number of draws (at least 1000).
    seed : int
        Root seed; chunk ``k`` uses the stream ``default_rng([seed, k])``.
    spatial_scale : float or None
        Scale of the heavy-tailed radial proposal around the curve.  None
        means ``total_length / (2 pi)``.
    exclusion : float
        Points closer to the curve than ``exclusion * total_length / N`` get
        zero weight.
    richardson : bool
        Combine the polygon with its half-grid polygon on the same draws,
        cancelling the first-order polygon bias.
    """

    samples: int = 1_000_000
    seed: int = 0
    spatial_scale: float | None = None
    exclusion: float = 1e-2
    richardson: bool = True

    def __post_init__(self):
        if self.samples < 1000:
            raise ValueError("samples must be >= 1000")


# -- grid sums ----------------------------------------------------------------

def gauss_weight_matrix(curve: KnotCurve, skip: int = 1, unsigned: bool = False) -> np.ndarray:
    """``W[i, j] = G(i, j) w_i w_j``: Gauss-map pullback integrated over a cell pair.

    Symmetric, zero diagonal.
    """
    w = curve.weights
    W = kernel_matrix(curve, "gauss", skip) * w[:, None] * w[None, :]
    W = 0.5 * (W + W.T)
    np.fill_diagonal(W, 0.0)
    return np.abs(W) if unsigned else W


def _chain_sum(W, pairs):
    """Sum over ``o_1 <= ... <= o_2n`` of the chord products, ties weighted 1/2."""
    n = W.shape[0]
    T = np.triu(np.ones((n, n)), 1) + 0.5 * np.eye(n)
    m = 2 * len(pairs)
    letters = "abcdefghijkl"[:m]
    operands, subs = [], []
    for k in range(m - 1):
        operands.append(T)
        subs.append(letters[k] + letters[k + 1])
    for a, b in pairs:
        operands.append(W)
        subs.append(letters[a - 1] + letters[b - 1])
    return float(np.einsum(",".join(subs) + "->", *operands, optimize="greedy"))


def cyclic_sum(W, d: ChordDiagram, method: str = "auto") -> float:
    """Trapezoidal sum of ``prod W[chord]`` over cyclically ordered tuples.

    Computed as the sum over the ``2n`` rotations of the based sums
    (first point anywhere, the rest following in order).  The one-chord and
    crossing-pair cases have direct O(N^2) forms used when ``method='auto'``.
    """
    if method == "auto" and d.n == 1:
        return float(W.sum())
    if method == "auto" and d.n == 2 and d.interleaved(0, 1):
        return interleaved_sum(W)
    return sum(_chain_sum(W, d.rotated(k).pairs) for k in range(d.size))


def _grid_value(curve, d, signed, skip, method="auto"):
    W = gauss_weight_matrix(curve, skip, unsigned=not signed)
    return cyclic_sum(W, d, method)


# -- Monte Carlo over configurations for larger diagrams --------------------

def _mc_value(curve, d, signed, mc: MCConfig):
    W = gauss_weight_matrix(curve, unsigned=not signed)
    n = curve.n
    m = d.size
    rotations = [np.array(d.rotated(k).pairs) - 1 for k in range(m)]
    vals = []
    for ci, start in enumerate(range(0, mc.samples, CHUNK)):
        rng = np.random.default_rng([mc.seed, ci])
        size = min(CHUNK, mc.samples - start)
        idx = np.sort(rng.integers(0, n, size=(size, m)), axis=1)
        distinct = np.all(np.diff(idx, axis=1) > 0, axis=1)
        total = np.zeros(size)
        for pairs in rotations:
            prod = np.ones(size)
            for a, b in pairs:
                prod *= W[idx[:, a], idx[:, b]]
            total += prod
        vals.append(np.where(distinct, total, 0.0))
    f = np.concatenate(vals)
    # uniform sorted multisets hit each strict m-subset with probability m!/n^m
    scale = n ** m / math.factorial(m)
    return float(scale * f.mean()), float(scale * f.std() / math.sqrt(len(f)))


def gauss_functional(curve: KnotCurve, d: ChordDiagram, signed: bool = True,
                     cfg: QuadratureConfig | None = None, mc: MCConfig | None = None,
                     method: str = "auto") -> FunctionalReport:
    """Integral over cyclic configurations of the diagram's Gauss-map pullback.

    ``signed=False`` integrates the absolute value of the pulled-back volume
    form instead.  Diagrams with at most three chords are summed exactly on
    the grid; larger ones use Monte Carlo over vertex tuples.
    """
    cfg = cfg or DEFAULT_QUAD
    echo = {"diagram": str(d), "signed": signed, **asdict(cfg)}
    if d.n > 3:
        mc = mc or MCConfig()
        value, err = _mc_value(curve, d, signed, mc)
        echo.update({"samples": mc.samples, "seed": mc.seed})
        return FunctionalReport(value, err, "mc-configurations", curve.n, echo)
    value = _grid_value(curve, d, signed, cfg.diagonal_skip, method)
    err = 0.0
    coarse = half_grid(curve) if cfg.richardson else None
    if coarse is not None:
        err = abs(value - _grid_value(coarse, d, signed, cfg.diagonal_skip, method))
    return FunctionalReport(value, err, "grid-gauss", curve.n, echo)


def writhe(curve: KnotCurve, cfg: QuadratureConfig | None = None) -> FunctionalReport:
    """Writhe as the one-chord Gauss functional."""
    return gauss_functional(curve, CHORD, True, cfg)


def reduced_functional(curve: KnotCurve, d: ChordDiagram, signed: bool = True,
                       cfg: QuadratureConfig | None = None,
                       mc: MCConfig | None = None) -> FunctionalReport:
    """Average of the Gauss functional over the ``2n`` rotations of ``d``."""
    reports = [gauss_functional(curve, GaussDiagram(d.rotated(k).pairs), signed, cfg, mc)
               for k in range(d.size)]
    value = sum(r.value for r in reports) / len(reports)
    err = max(r.error for r in reports)
    echo = dict(reports[0].config, diagram=str(d), reduced=True)
    return FunctionalReport(value, err, reports[0].method + "-reduced", curve.n, echo)


# -- the volume term ------------------------------------------------------------

@numba.njit(cache=True, parallel=True)
def _field_triple(x, a, b):
    """Sum over segment triples ``i < j < k`` of ``det(H_i, H_j, H_k)`` at each point.

    ``H_i`` is the Biot-Savart field of the straight segment ``[a_i, b_i]``
    integrated exactly along the segment.
    """
    m = x.shape[0]
    n = a.shape[0]
    out = np.empty(m)
    for s in numba.prange(m):
        H = np.empty((n, 3))
        x0, x1, x2 = x[s, 0], x[s, 1], x[s, 2]
        t0 = t1 = t2 = 0.0
        for k in range(n):
            r0 = a[k, 0] - x0
            r1 = a[k, 1] - x1
            r2 = a[k, 2] - x2
            s0 = b[k, 0] - x0
            s1 = b[k, 1] - x1
            s2 = b[k, 2] - x2
            na = math.sqrt(r0 * r0 + r1 * r1 + r2 * r2)
            nb = math.sqrt(s0 * s0 + s1 * s1 + s2 * s2)
            f = (na + nb) / (na * nb * (na * nb + r0 * s0 + r1 * s1 + r2 * s2))
            H[k, 0] = (r1 * s2 - r2 * s1) * f
            H[k, 1] = (r2 * s0 - r0 * s2) * f
            H[k, 2] = (r0 * s1 - r1 * s0) * f
            t0 += H[k, 0]
            t1 += H[k, 1]
            t2 += H[k, 2]
        p0 = p1 = p2 = 0.0
        y = 0.0
        for j in range(n):
            h0, h1, h2 = H[j, 0], H[j, 1], H[j, 2]
            q0 = t0 - p0 - h0
            q1 = t1 - p1 - h1
            q2 = t2 - p2 - h2
            y += h0 * (q1 * p2 - q2 * p1) + h1 * (q2 * p0 - q0 * p2) + h2 * (q0 * p1 - q1 * p0)
            p0 += h0
            p1 += h1
            p2 += h2
        out[s] = y
    return out


@numba.njit(cache=True, parallel=True)
def _proposal_density(x, a, ell, tt, scale, length):
    """Density of the curve-anchored proposal and the distance to the polygon.

    The proposal picks a uniform arclength point on the polygon, a uniform
    direction, and a radius ``scale * tan(pi U / 2)``; its density is the
    segment integral of ``(scale / 2 pi^2) / (r^2 (r^2 + scale^2))`` over the
    polygon, divided by the length.
    """
    m = x.shape[0]
    n = a.shape[0]
    q = np.empty(m)
    dist = np.empty(m)
    c = scale / (2.0 * math.pi ** 2) / (scale * scale) / length
    for s in numba.prange(m):
        x0, x1, x2 = x[s, 0], x[s, 1], x[s, 2]
        acc = 0.0
        dmin = 1e300
        for k in range(n):
            r0 = a[k, 0] - x0
            r1 = a[k, 1] - x1
            r2 = a[k, 2] - x2
            na2 = r0 * r0 + r1 * r1 + r2 * r2
            sig = r0 * tt[k, 0] + r1 * tt[k, 1] + r2 * tt[k, 2]
            d2 = max(na2 - sig * sig, 1e-300)
            d = math.sqrt(d2)
            bv = sig + ell[k]
            acc += math.atan2(d * ell[k], d2 + sig * bv) / d
            dp2 = d2 + scale * scale
            dp = math.sqrt(dp2)
            acc -= math.atan2(dp * ell[k], dp2 + sig * bv) / dp
            pr = min(max(-sig, 0.0), ell[k])
            dd = na2 + 2.0 * pr * sig + pr * pr
            if dd < dmin:
                dmin = dd
        q[s] = acc * c
        dist[s] = math.sqrt(max(dmin, 0.0))
    return q, dist


def _polygon(points):
    a = np.ascontiguousarray(points, dtype=float)
    b = np.ascontiguousarray(np.roll(a, -1, axis=0))
    seg = b - a
    ell = np.linalg.norm(seg, axis=1)
    return a, b, ell, seg / ell[:, None]


def i_y_samples(curve: KnotCurve, mc: MCConfig) -> np.ndarray:
    """Per-draw estimator values whose mean is the volume functional."""
    a, b, ell, tt = _polygon(curve.points)
    use_half = mc.richardson and curve.n % 2 == 0 and curve.n >= 32
    if use_half:
        ac, bc, _, _ = _polygon(curve.points[::2])
    length = float(ell.sum())
    scale = mc.spatial_scale or length / (2.0 * math.pi)
    cum = np.concatenate([[0.0], np.cumsum(ell)])
    rex = mc.exclusion * length / curve.n
    norm = 3.0 / (4.0 * math.pi) ** 3
    out = []
    for ci, start in enumerate(range(0, mc.samples, CHUNK)):
        rng = np.random.default_rng([mc.seed, ci])
        m = min(CHUNK, mc.samples - start)
        u = rng.uniform(0.0, length, m)
        k = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, curve.n - 1)
        base = a[k] + (u - cum[k])[:, None] * tt[k]
        direction = rng.standard_normal((m, 3))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radius = scale * np.tan(0.5 * math.pi * rng.uniform(0.0, 1.0, m))
        x = base + radius[:, None] * direction
        q, dist = _proposal_density(x, a, ell, tt, scale, length)
        y = _field_triple(x, a, b)
        if use_half:
            y = 2.0 * y - _field_triple(x, ac, bc)
        out.append(np.where(dist >= rex, norm * y / q, 0.0))
    return np.concatenate(out)


def i_y(curve: KnotCurve, mc: MCConfig | None = None) -> FunctionalReport:
    """Monte Carlo estimate of the Biot-Savart triple-product volume integral.

    Three curve points in cyclic order and one point of space; the cyclic
    ordering contributes the factor 3 relative to the based ordering
    ``u1 < u2 < u3`` that the per-draw sum enumerates.
    """
    mc = mc or MCConfig()
    f = i_y_samples(curve, mc)
    value = float(f.mean())
    err = float(f.std() / math.sqrt(len(f)))
    return FunctionalReport(value, err, "mc-richardson" if mc.richardson else "mc", curve.n,
                            asdict(mc))


def conway_a2_geometric(curve: KnotCurve, cfg: QuadratureConfig | None = None,
                        mc: MCConfig | None = None) -> FunctionalReport:
    """``I_X / 4 - I_Y / 3 + 1/24``, the integral form of the second Conway coefficient."""
    ix = gauss_functional(curve, X, True, cfg)
    iy = i_y(curve, mc)
    value = 0.25 * ix.value - iy.value / 3.0 + 1.0 / 24.0
    err = combined_error(0.25 * ix.error, iy.error / 3.0)
    echo = {"i_x": ix.value, "i_x_error": ix.error, "i_y": iy.value, "i_y_error": iy.error,
            "quadrature": ix.config, "monte_carlo": iy.config}
    return FunctionalReport(value, err, "grid+mc", curve.n, echo)
