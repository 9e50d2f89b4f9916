"""Plane projections of polygonal curves and sphere-averaged crossing counts."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curve import KnotCurve
from .diagrams import KnotDiagramCode, Token
from .report import FunctionalReport

ANGLE_TOL = 1e-4
PARAM_EPS = 1e-9
TRIPLE_TOL = 1e-6
MIN_SAMPLES = 100


class GenericityError(ValueError):
    """A projection or a pair of projections is not in general position."""


class DegenerateCurveError(RuntimeError):
    """Too many random projections of a curve were irregular."""


@dataclass(frozen=True)
class Crossing:
    """Transverse crossing of segments ``i < j`` in the projection.

    ``s`` and ``t`` are the intersection parameters on segments ``i`` and
    ``j``; ``over`` names the segment nearer the viewer (larger height along
    the direction); ``sign`` is the sign of the Gauss kernel there.
    """

    i: int
    j: int
    s: float
    t: float
    over: int
    sign: int

    def to_json(self):
        return {"i": self.i, "j": self.j, "s": self.s, "t": self.t, "over": self.over,
                "sign": self.sign}


@dataclass(frozen=True)
class CrossingSet:
    direction: np.ndarray
    crossings: tuple
    regular: bool
    reason: str = ""

    @property
    def count(self) -> int:
        return len(self.crossings)

    @property
    def signed_count(self) -> int:
        return sum(c.sign for c in self.crossings)

    def chords(self):
        """Curve parameters ``(i + s, j + t)`` of each crossing."""
        return [(c.i + c.s, c.j + c.t) for c in self.crossings]

    def to_json(self):
        return {"direction": self.direction.tolist(), "regular": self.regular,
                "reason": self.reason, "n": self.count, "w": self.signed_count,
                "crossings": [c.to_json() for c in self.crossings]}


def _plane_basis(v):
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if not abs(norm - 1.0) < 1e-9:
        raise ValueError("direction must be a unit vector")
    helper = np.array([1.0, 0.0, 0.0]) if abs(v[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(v, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(v, e1)
    return v, e1, e2


def _project(curve, v):
    v, e1, e2 = _plane_basis(v)
    p = curve.points
    P = np.stack([p @ e1, p @ e2], axis=1)
    D = np.roll(P, -1, axis=0) - P
    return v, P, D


def _test_pairs(curve, v, P, D, i, j):
    """Exact intersection test on index arrays; identical arithmetic for every caller."""
    di, dj = D[i], D[j]
    cross = di[:, 0] * dj[:, 1] - di[:, 1] * dj[:, 0]
    r = P[j] - P[i]
    li = np.hypot(di[:, 0], di[:, 1])
    lj = np.hypot(dj[:, 0], dj[:, 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (r[:, 0] * dj[:, 1] - r[:, 1] * dj[:, 0]) / cross
        t = (r[:, 0] * di[:, 1] - r[:, 1] * di[:, 0]) / cross
        sin_angle = np.abs(cross) / (li * lj)
    exact = ~np.isfinite(s) | ~np.isfinite(t)
    small = exact | (sin_angle < ANGLE_TOL)
    hit = ~exact & (s >= 0.0) & (s <= 1.0) & (t >= 0.0) & (t <= 1.0)
    # exactly parallel segments are a tangency when they overlap on a line
    with np.errstate(divide="ignore", invalid="ignore"):
        offset = np.abs(r[:, 0] * di[:, 1] - r[:, 1] * di[:, 0]) / li
        a0 = (r[:, 0] * di[:, 0] + r[:, 1] * di[:, 1]) / li
    a1 = a0 + (dj[:, 0] * di[:, 0] + dj[:, 1] * di[:, 1]) / li
    lo, hi = np.minimum(a0, a1), np.maximum(a0, a1)
    overlap = exact & (offset <= TRIPLE_TOL * curve.diameter) & (hi >= 0.0) & (lo <= li)
    tangent = (hit & small) | overlap
    hit = hit & ~small
    near_end = hit & ((s < PARAM_EPS) | (s > 1 - PARAM_EPS) | (t < PARAM_EPS) | (t > 1 - PARAM_EPS))
    return hit, s, t, tangent, near_end


def _candidate_pairs_all(n):
    i, j = np.triu_indices(n, 2)
    keep = ~((i == 0) & (j == n - 1))
    return i[keep], j[keep]


def _candidate_pairs_sweep(n, P, D):
    """Non-adjacent segment pairs whose bounding boxes overlap (sort and sweep in x)."""
    Q = P + D
    xmin, xmax = np.minimum(P[:, 0], Q[:, 0]), np.maximum(P[:, 0], Q[:, 0])
    ymin, ymax = np.minimum(P[:, 1], Q[:, 1]), np.maximum(P[:, 1], Q[:, 1])
    order = np.argsort(xmin, kind="stable")
    xs = xmin[order]
    stop = np.searchsorted(xs, xmax[order], side="right")
    count = stop - np.arange(n) - 1
    count = np.maximum(count, 0)
    a = np.repeat(np.arange(n), count)
    offsets = np.arange(count.sum()) - np.repeat(np.cumsum(count) - count, count)
    b = a + 1 + offsets
    i, j = order[a], order[b]
    i, j = np.minimum(i, j), np.maximum(i, j)
    box = (ymin[i] <= ymax[j]) & (ymin[j] <= ymax[i])
    gap = j - i
    keep = box & (gap >= 2) & (gap <= n - 2)
    i, j = i[keep], j[keep]
    idx = np.lexsort((j, i))
    return i[idx], j[idx]


def _irregular_local(curve, P, D):
    """Reason string if a projected edge degenerates or two neighbours fold back."""
    length = np.hypot(D[:, 0], D[:, 1])
    if np.any(length <= 1e-12 * curve.total_length):
        return "edge parallel to the direction"
    nxt = np.roll(D, -1, axis=0)
    cross = D[:, 0] * nxt[:, 1] - D[:, 1] * nxt[:, 0]
    dot = D[:, 0] * nxt[:, 0] + D[:, 1] * nxt[:, 1]
    if np.any((np.abs(cross) < ANGLE_TOL * length * np.roll(length, -1)) & (dot < 0)):
        return "cusp in projection"
    return ""


def project_crossings(curve: KnotCurve, v, method: str = "sweep") -> CrossingSet:
    """All transverse crossings of the projection of ``curve`` along ``v``.

    ``method='brute'`` tests every non-adjacent segment pair; ``'sweep'``
    prunes with bounding boxes first.  Both run the same exact test, so
    their output is identical.
    """
    v, P, D = _project(curve, v)
    n = curve.n
    if method == "brute":
        i, j = _candidate_pairs_all(n)
    elif method == "sweep":
        i, j = _candidate_pairs_sweep(n, P, D)
    else:
        raise ValueError(f"unknown method {method!r}")
    hit, s, t, tangent, near_end = _test_pairs(curve, v, P, D, i, j)
    reason = _irregular_local(curve, P, D)
    if not reason and np.any(tangent):
        reason = "tangency"
    if not reason and np.any(near_end):
        reason = "crossing at a vertex"
    i, j, s, t = i[hit], j[hit], s[hit], t[hit]
    pts = curve.points
    seg = np.roll(pts, -1, axis=0) - pts
    xi = pts[i] + s[:, None] * seg[i]
    xj = pts[j] + t[:, None] * seg[j]
    height = (xj - xi) @ v
    kernel = np.einsum("ij,ij->i", xj - xi, np.cross(seg[i], seg[j]))
    if not reason and len(i) > 1:
        plane = P[i] + s[:, None] * D[i]
        diff = plane[:, None, :] - plane[None, :, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])
        np.fill_diagonal(dist, np.inf)
        if dist.min() < TRIPLE_TOL * curve.diameter:
            reason = "near triple point"
    crossings = tuple(
        Crossing(int(a), int(b), float(sa), float(tb), int(b) if h > 0 else int(a),
                 1 if k > 0 else -1)
        for a, b, sa, tb, h, k in zip(i, j, s, t, height, kernel))
    return CrossingSet(v, crossings, not reason, reason)


def code_from_projection(cs: CrossingSet) -> KnotDiagramCode:
    """Signed Gauss code read off a regular projection.

    Code signs follow the usual right-hand rule seen from the viewer, which is
    the negative of the Gauss-kernel sign stored on each crossing.
    """
    if not cs.regular:
        raise GenericityError(f"projection is not regular: {cs.reason}")
    events = []
    for cid, c in enumerate(cs.crossings, start=1):
        events.append((c.i + c.s, Token(cid, c.over == c.i, -c.sign)))
        events.append((c.j + c.t, Token(cid, c.over == c.j, -c.sign)))
    events.sort(key=lambda e: e[0])
    code = KnotDiagramCode(tuple(tok for _, tok in events))
    return code.relabelled() if code.tokens else code


def random_direction(rng) -> np.ndarray:
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def _regular_draws(curve, samples, seed, stat, arity=1):
    if samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples")
    rng = np.random.default_rng(seed)
    values = []
    rejected = 0
    while len(values) < samples:
        dirs = [random_direction(rng) for _ in range(arity)]
        try:
            values.append(stat(*dirs))
        except GenericityError:
            rejected += 1
            if rejected > samples:
                raise DegenerateCurveError(
                    f"{rejected} irregular draws for {len(values)} regular ones")
    arr = np.asarray(values, dtype=float)
    return arr, rejected


def _report(arr, rejected, method, curve, samples, seed):
    return FunctionalReport(float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(len(arr))),
                            method, curve.n,
                            {"samples": samples, "seed": seed, "rejected": rejected})


def _regular(curve, v):
    cs = project_crossings(curve, v)
    if not cs.regular:
        raise GenericityError(cs.reason)
    return cs


def average_crossing_number(curve: KnotCurve, samples: int = 2000, seed: int = 0) -> FunctionalReport:
    """Mean crossing count of projections along uniformly random directions."""
    arr, rej = _regular_draws(curve, samples, seed, lambda v: _regular(curve, v).count)
    return _report(arr, rej, "mc-directions", curve, samples, seed)


def average_writhe(curve: KnotCurve, samples: int = 2000, seed: int = 0) -> FunctionalReport:
    """Mean signed crossing count over random directions (Gauss-kernel signs)."""
    arr, rej = _regular_draws(curve, samples, seed, lambda v: _regular(curve, v).signed_count)
    return _report(arr, rej, "mc-directions", curve, samples, seed)


def _interleave_count(chords_a, chords_b, skip_same: bool):
    count = 0
    for ka, (a, c) in enumerate(chords_a):
        lo, hi = min(a, c), max(a, c)
        for kb, (b, d) in enumerate(chords_b):
            if skip_same and ka == kb:
                continue
            if (lo < b < hi) != (lo < d < hi):
                count += 1
    return count


def pair_crossing_count(curve: KnotCurve, v1, v2, tol: float = 1e-9) -> float:
    """Quarter of the number of cyclic 4-tuples pairing a ``v1``-crossing with a ``v2``-crossing.

    Each interleaved (v1-crossing, v2-crossing) pair contributes two such
    tuples.  When ``v1 == v2`` the tuples built from a single crossing are
    left out; otherwise any shared curve parameter makes the pair
    non-generic.
    """
    c1 = _regular(curve, v1)
    same = np.allclose(c1.direction, np.asarray(v2, float), rtol=0.0, atol=1e-15)
    c2 = c1 if same else _regular(curve, v2)
    ch1, ch2 = c1.chords(), c2.chords()
    if not same:
        params1 = np.array([p for ch in ch1 for p in ch])
        params2 = np.array([p for ch in ch2 for p in ch])
        if params1.size and params2.size:
            gap = np.abs(params1[:, None] - params2[None, :])
            gap = np.minimum(gap, curve.n - gap)
            if gap.min() < tol:
                raise GenericityError("the two projections share a crossing parameter")
    return 0.5 * _interleave_count(ch1, ch2, skip_same=same)


def average_x_crossing(curve: KnotCurve, samples: int = 2000, seed: int = 0) -> FunctionalReport:
    """Mean of :func:`pair_crossing_count` over independent uniform direction pairs."""
    arr, rej = _regular_draws(curve, samples, seed,
                              lambda a, b: pair_crossing_count(curve, a, b), arity=2)
    return _report(arr, rej, "mc-direction-pairs", curve, samples, seed)


def generic_direction(curve: KnotCurve, seed: int = 0, tries: int = 100) -> CrossingSet:
    """First regular projection among seeded random directions."""
    rng = np.random.default_rng(seed)
    for _ in range(tries):
        cs = project_crossings(curve, random_direction(rng))
        if cs.regular:
            return cs
    raise DegenerateCurveError("no regular projection found")
