"""Closed polygonal space curves.

A :class:`KnotCurve` is the discrete stand-in for a smooth embedding of the
circle.  Points are stored in traversal order; the last point connects back
to the first.  Tangents use a fourth-order central difference stencil and
segment lengths carry a circular-arc correction, so sums weighted by
``weights`` integrate smooth periodic functions of arclength accurately.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

MIN_POINTS = 16
DEFAULT_GAP_RATIO = 1e-6


class CurveError(ValueError):
    """Raised when a point set does not describe a valid embedded curve."""


def segment_distances(a0, a1, b0, b1):
    """Minimum distances between 3D segments ``[a0, a1]`` and ``[b0, b1]``.

    All arguments are ``(..., 3)`` arrays; the result has the broadcast shape
    without the last axis.
    """
    d1 = a1 - a0
    d2 = b1 - b0
    r = a0 - b0
    a = np.einsum('...i,...i', d1, d1)
    e = np.einsum('...i,...i', d2, d2)
    f = np.einsum('...i,...i', d2, r)
    c = np.einsum('...i,...i', d1, r)
    b = np.einsum('...i,...i', d1, d2)
    tiny = 1e-300
    with np.errstate(divide='ignore', invalid='ignore'):
        denom = a * e - b * b
        s = np.where(denom > 1e-14 * a * e, (b * f - c * e) / denom, 0.0)
        s = np.clip(np.nan_to_num(s), 0.0, 1.0)
        t = np.where(e > tiny, (b * s + f) / e, 0.0)
        # re-clamp t, then recompute s for the clamped t
        t = np.clip(t, 0.0, 1.0)
        s = np.where(a > tiny, np.clip((b * t - c) / a, 0.0, 1.0), 0.0)
    p = a0 + s[..., None] * d1
    q = b0 + t[..., None] * d2
    return np.linalg.norm(p - q, axis=-1)


def min_nonadjacent_gap(points, chunk=256):
    """Smallest distance between two non-adjacent edges of a closed polygon."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    nxt = np.roll(pts, -1, axis=0)
    best = np.inf
    idx = np.arange(n)
    for start in range(0, n, chunk):
        rows = idx[start:start + chunk]
        diff = (idx[None, :] - rows[:, None]) % n
        mask = (diff > 1) & (diff < n - 1) & (idx[None, :] > rows[:, None])
        ii, jj = np.nonzero(mask)
        if ii.size == 0:
            continue
        ii = rows[ii]
        d = segment_distances(pts[ii], nxt[ii], pts[jj], nxt[jj])
        best = min(best, float(d.min()))
    return best


def _menger_curvature(prev, cur, nxt):
    a = cur - prev
    b = nxt - cur
    c = nxt - prev
    cross = np.linalg.norm(np.cross(a, b), axis=-1)
    denom = (np.linalg.norm(a, axis=-1) * np.linalg.norm(b, axis=-1)
             * np.linalg.norm(c, axis=-1))
    return 2.0 * cross / denom


@dataclass(frozen=True, eq=False)
class KnotCurve:
    """Closed oriented polygon in R^3.

    Parameters
    ----------
    points : (N, 3) array_like
        Vertices in traversal order, without repeating the first point.
    gap_ratio : float
        Embeddedness threshold: non-adjacent edges must stay further apart
        than ``gap_ratio * total_length``.
    validate : bool
        Skip the O(N^2) embeddedness check when False.  Intended for
        high-resolution reference curves built from known-good data.
    """

    points: np.ndarray
    gap_ratio: float = DEFAULT_GAP_RATIO
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise CurveError(f"points must have shape (N, 3), got {pts.shape}")
        if len(pts) < MIN_POINTS:
            raise CurveError(f"need at least {MIN_POINTS} points, got {len(pts)}")
        if not np.all(np.isfinite(pts)):
            raise CurveError("points must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, 'points', pts)
        chords = self.chord_lengths
        total = float(chords.sum())
        if chords.min() <= 1e-12 * total:
            raise CurveError("consecutive points coincide")
        if self.validate:
            gap = min_nonadjacent_gap(pts)
            if gap <= self.gap_ratio * total:
                raise CurveError(
                    f"curve is not embedded: edge gap {gap:.3e} <= "
                    f"{self.gap_ratio:g} * length {total:.6g}")

    def __len__(self):
        return len(self.points)

    @property
    def n(self) -> int:
        return len(self.points)

    @cached_property
    def chord_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.roll(self.points, -1, axis=0) - self.points, axis=1)

    @cached_property
    def curvature(self) -> np.ndarray:
        """Discrete curvature at each vertex (circle through three neighbours)."""
        p = self.points
        return _menger_curvature(np.roll(p, 1, axis=0), p, np.roll(p, -1, axis=0))

    @cached_property
    def segment_lengths(self) -> np.ndarray:
        """Edge lengths corrected to circular arcs of the local curvature."""
        c = self.chord_lengths
        k = 0.5 * (self.curvature + np.roll(self.curvature, -1))
        x = np.clip(0.5 * k * c, 0.0, 1.0)
        with np.errstate(invalid='ignore', divide='ignore'):
            ratio = np.where(x > 1e-6, np.arcsin(x) / x, 1.0 + x * x / 6.0)
        return c * ratio

    @cached_property
    def cumlen(self) -> np.ndarray:
        """Arclength at each vertex, with ``cumlen[N] == total_length``."""
        out = np.zeros(self.n + 1)
        np.cumsum(self.segment_lengths, out=out[1:])
        out.setflags(write=False)
        return out

    @property
    def total_length(self) -> float:
        return float(self.cumlen[-1])

    @cached_property
    def weights(self) -> np.ndarray:
        """Quadrature weight per vertex: half of each adjacent edge."""
        s = self.segment_lengths
        return 0.5 * (s + np.roll(s, 1))

    @cached_property
    def tangents(self) -> np.ndarray:
        p = self.points
        d = (8.0 * (np.roll(p, -1, axis=0) - np.roll(p, 1, axis=0))
             - (np.roll(p, -2, axis=0) - np.roll(p, 2, axis=0)))
        t = d / np.linalg.norm(d, axis=1, keepdims=True)
        t.setflags(write=False)
        return t

    @cached_property
    def diameter(self) -> float:
        p = self.points
        if self.n <= 2048:
            diff = p[:, None, :] - p[None, :, :]
            return float(np.sqrt((diff ** 2).sum(-1).max()))
        sub = p[:: self.n // 1024 + 1]
        diff = sub[:, None, :] - sub[None, :, :]
        return float(np.sqrt((diff ** 2).sum(-1).max()))

    @property
    def centroid(self) -> np.ndarray:
        return (self.points * self.weights[:, None]).sum(0) / self.weights.sum()

    def arc_distance(self, i, j):
        """Length of the shorter sub-arc between vertices ``i`` and ``j``."""
        return arc_distance(self, i, j)

    def pair_distances(self) -> np.ndarray:
        """N x N matrix of the intrinsic distance D between vertices."""
        s = self.cumlen[:-1]
        d = np.abs(s[None, :] - s[:, None])
        return np.minimum(d, self.total_length - d)

    def transformed(self, fn) -> "KnotCurve":
        return KnotCurve(fn(self.points), gap_ratio=self.gap_ratio)

    def scaled(self, factor: float) -> "KnotCurve":
        return KnotCurve(self.points * factor, gap_ratio=self.gap_ratio)

    def mirrored(self, axis: int = 2) -> "KnotCurve":
        """Reflect through the coordinate plane normal to ``axis``."""
        p = self.points.copy()
        p[:, axis] *= -1.0
        return KnotCurve(p, gap_ratio=self.gap_ratio)

    def to_json(self) -> dict:
        return {"points": self.points.tolist(), "closed": True}

    @classmethod
    def from_json(cls, data, **kwargs) -> "KnotCurve":
        if not data.get("closed", True):
            raise CurveError("only closed curves are supported")
        return cls(np.asarray(data["points"], dtype=float), **kwargs)


def arc_distance(curve: KnotCurve, i, j):
    """Intrinsic distance ``min(d, L - d)`` between vertices ``i`` and ``j``.

    ``d`` is the forward arclength from ``i`` to ``j``.  Works elementwise on
    integer arrays.
    """
    n = curve.n
    i = np.asarray(i) % n
    j = np.asarray(j) % n
    s = curve.cumlen
    d = np.abs(s[j] - s[i])
    out = np.minimum(d, curve.total_length - d)
    return float(out) if out.ndim == 0 else out


def save_curve(curve: KnotCurve, path):
    Path(path).write_text(json.dumps(curve.to_json()))


def load_curve(path, **kwargs) -> KnotCurve:
    return KnotCurve.from_json(json.loads(Path(path).read_text()), **kwargs)


# -- arclength resampling -------------------------------------------------

def _uniform_from_dense(dense_pts, dense_param, n, evaluate):
    """Pick ``n`` parameters equally spaced in arclength along a dense table."""
    seg = np.linalg.norm(np.diff(dense_pts, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.arange(n) * (s[-1] / n)
    params = np.interp(targets, s, dense_param)
    return evaluate(params)


def resample_arclength(curve: KnotCurve, n: int, *, oversample: int = 32,
                       gap_ratio: float | None = None) -> KnotCurve:
    """Resample ``curve`` to ``n`` points equally spaced in arclength.

    The vertices are interpolated by a periodic cubic spline in chord-length
    parameter; the spline is then sampled densely and inverted for uniform
    arclength.  Phase is kept: the first output point equals the first input
    point.
    """
    if n < MIN_POINTS:
        raise CurveError(f"need at least {MIN_POINTS} points, got {n}")
    spline = periodic_spline(curve.points)
    period = spline.x[-1]
    m = max(oversample * curve.n, 8 * n)
    u = np.linspace(0.0, period, m + 1)
    pts = spline(u)
    ratio = curve.gap_ratio if gap_ratio is None else gap_ratio
    return KnotCurve(_uniform_from_dense(pts, u, n, spline), gap_ratio=ratio)


def periodic_spline(points) -> CubicSpline:
    pts = np.asarray(points, dtype=float)
    closed = np.vstack([pts, pts[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    knots = np.concatenate([[0.0], np.cumsum(seg)])
    return CubicSpline(knots, closed, bc_type='periodic')


def sample_parametric(fn, n: int, *, dense: int | None = None,
                      gap_ratio: float = DEFAULT_GAP_RATIO,
                      validate: bool = True) -> KnotCurve:
    """Sample a 2*pi-periodic map ``fn(t) -> (len(t), 3)`` uniformly in arclength."""
    m = dense or max(64 * n, 16384)
    t = np.linspace(0.0, 2.0 * math.pi, m + 1)
    pts = fn(t)
    return KnotCurve(_uniform_from_dense(pts, t, n, fn), gap_ratio=gap_ratio,
                     validate=validate)


def sample_polyline(dense_points, n: int, **kwargs) -> KnotCurve:
    """Uniform-arclength sample of a closed dense polyline (no repeated endpoint)."""
    pts = np.asarray(dense_points, dtype=float)
    closed = np.vstack([pts, pts[:1]])
    u = np.arange(len(closed), dtype=float)

    def evaluate(params):
        k = np.clip(np.floor(params).astype(int), 0, len(pts) - 1)
        frac = (params - k)[:, None]
        return closed[k] * (1.0 - frac) + closed[k + 1] * frac

    return KnotCurve(_uniform_from_dense(closed, u, n, evaluate), **kwargs)
