"""Möbius transformations of space, the conformal angle, and excess length."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curve import KnotCurve, resample_arclength, segment_distances


class PoleError(ValueError):
    """A point reached the center of an inversion."""


@dataclass(frozen=True)
class SphereInversion:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(3)
        if not self.radius > 0:
            raise ValueError("inversion radius must be positive")
        object.__setattr__(self, 'center', c)

    def __call__(self, p):
        q = np.asarray(p, dtype=float) - self.center
        r2 = np.sum(q * q, axis=-1, keepdims=True)
        if np.any(r2 == 0.0):
            raise PoleError(f"point coincides with inversion center {self.center.tolist()}")
        return self.center + self.radius ** 2 * q / r2

    def push_tangent(self, p, v):
        """Differential of the inversion at ``p`` applied to ``v``."""
        q = np.asarray(p, dtype=float) - self.center
        r2 = np.sum(q * q, axis=-1, keepdims=True)
        qv = np.sum(q * v, axis=-1, keepdims=True)
        return self.radius ** 2 / r2 * (v - 2.0 * qv * q / r2)

    def to_json(self):
        return {"inversion": {"center": self.center.tolist(), "radius": float(self.radius)}}


@dataclass(frozen=True)
class Similarity:
    """``p -> scale * rotation @ p + translation`` with a proper rotation."""

    rotation: np.ndarray
    scale: float = 1.0
    translation: np.ndarray = None

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        if not np.allclose(R @ R.T, np.eye(3), atol=1e-9) or abs(np.linalg.det(R) - 1.0) > 1e-9:
            raise ValueError("rotation must be orthogonal with determinant +1")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        t = np.zeros(3) if self.translation is None else np.asarray(self.translation, float).reshape(3)
        object.__setattr__(self, 'rotation', R)
        object.__setattr__(self, 'translation', t)

    def __call__(self, p):
        return self.scale * np.asarray(p, dtype=float) @ self.rotation.T + self.translation

    def push_tangent(self, p, v):
        return self.scale * np.asarray(v, dtype=float) @ self.rotation.T

    def to_json(self):
        return {"similarity": {"rotation": self.rotation.tolist(), "scale": float(self.scale),
                               "translation": self.translation.tolist()}}


@dataclass(frozen=True)
class MobiusTransform:
    """Composition of primitive maps, applied in list order."""

    steps: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'steps', tuple(self.steps))

    def __call__(self, p):
        return apply_transform(self, p)

    def then(self, other: "MobiusTransform") -> "MobiusTransform":
        return MobiusTransform(self.steps + other.steps)

    def push(self, p, v):
        """Map points ``p`` and transport tangent vectors ``v`` along with them."""
        p = np.asarray(p, dtype=float)
        v = np.asarray(v, dtype=float)
        for step in self.steps:
            v = step.push_tangent(p, v)
            p = step(p)
        return p, v

    def to_json(self):
        return {"steps": [s.to_json() for s in self.steps]}

    @classmethod
    def from_json(cls, data) -> "MobiusTransform":
        steps = []
        for item in data["steps"]:
            if "inversion" in item:
                spec = item["inversion"]
                steps.append(SphereInversion(spec["center"], float(spec["radius"])))
            elif "similarity" in item:
                spec = item["similarity"]
                steps.append(Similarity(spec.get("rotation", np.eye(3)), float(spec.get("scale", 1.0)),
                                        spec.get("translation")))
            else:
                raise ValueError(f"unknown transform step {sorted(item)}")
        return cls(tuple(steps))


IDENTITY = MobiusTransform(())


def apply_transform(t: MobiusTransform, p):
    """Apply ``t`` to one point or an ``(..., 3)`` array of points."""
    out = np.asarray(p, dtype=float)
    for step in t.steps:
        out = step(out)
    return out


def _polyline_distance(points, x):
    a = points
    b = np.roll(points, -1, axis=0)
    return float(segment_distances(a, b, x[None, :], x[None, :]).min())


def transform_curve(t: MobiusTransform, curve: KnotCurve, *, margin: float = 1e-3,
                    resample: bool = True) -> KnotCurve:
    """Image of ``curve`` under ``t``, resampled to uniform arclength.

    Every inversion center must stay further than ``margin`` times the
    current curve diameter from the polygon it acts on.
    """
    pts = curve.points
    for step in t.steps:
        if isinstance(step, SphereInversion):
            diam = float(np.ptp(pts, axis=0).max())
            if _polyline_distance(pts, step.center) <= margin * diam:
                raise PoleError("inversion center too close to the curve")
        pts = step(pts)
    image = KnotCurve(pts, gap_ratio=curve.gap_ratio)
    return resample_arclength(image, curve.n) if resample else image


def random_rotation(rng) -> np.ndarray:
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def random_far_inversion(curve: KnotCurve, rng, min_factor: float = 2.0) -> MobiusTransform:
    """Inversion whose center lies at least ``min_factor`` diameters from ``curve``.

    The radius equals the center's distance to the centroid, so the image has
    roughly the size of the input.
    """
    diam = curve.diameter
    direction = rng.standard_normal(3)
    direction /= np.linalg.norm(direction)
    reach = float(np.linalg.norm(curve.points - curve.centroid, axis=1).max())
    dist = reach + diam * (min_factor + rng.random())
    center = curve.centroid + dist * direction
    return MobiusTransform((SphereInversion(center, dist),))


# -- conformal angle -------------------------------------------------------

def conformal_angle(p1, t1, p2, t2) -> float:
    """Angle in [0, pi] between the two circles through ``p1`` and ``p2``.

    One circle is tangent to ``t1`` at ``p1``, the other to ``t2`` at ``p2``.
    Computed by reflecting ``t1`` across the chord direction and measuring
    its angle with ``t2``.
    """
    p1, t1, p2, t2 = (np.asarray(a, dtype=float) for a in (p1, t1, p2, t2))
    d = p2 - p1
    r = np.linalg.norm(d)
    if r == 0.0:
        raise ValueError("conformal angle undefined for coincident points")
    w = d / r
    up = 2.0 * np.dot(t1, w) * w - t1
    c = np.dot(up, t2) / (np.linalg.norm(up) * np.linalg.norm(t2))
    return float(math.acos(min(1.0, max(-1.0, c))))


# -- inversion at a curve point and excess length ---------------------------

@dataclass(frozen=True)
class OpenCurve:
    """Polygonal curve with both ends running off to infinity along one direction."""

    points: np.ndarray
    asymptotic_dir: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        d = np.asarray(self.asymptotic_dir, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 2:
            raise ValueError("points must have shape (M, 3) with M >= 2")
        if np.any(np.linalg.norm(np.diff(pts, axis=0), axis=1) == 0.0):
            raise ValueError("consecutive points coincide")
        if abs(np.linalg.norm(d) - 1.0) > 1e-9:
            raise ValueError("asymptotic_dir must be a unit vector")
        object.__setattr__(self, 'points', pts)
        object.__setattr__(self, 'asymptotic_dir', d)


def _frame_to_x(t):
    """Rotation taking unit vector ``t`` to ``e_x``."""
    ex = np.array([1.0, 0.0, 0.0])
    v = np.cross(t, ex)
    s = np.linalg.norm(v)
    c = float(np.dot(t, ex))
    if s < 1e-12:
        return np.eye(3) if c > 0 else np.diag([-1.0, -1.0, 1.0])
    k = v / s
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + s * K + (1 - c) * K @ K


def invert_at_curve_point(curve: KnotCurve, i: int, window: int = 4) -> OpenCurve:
    """Send vertex ``i`` to infinity by unit inversion centred there.

    The curve is first moved so that vertex ``i`` sits at the origin with
    tangent along ``e_x``.  Vertices within ``window // 2`` steps of ``i``
    are dropped (``window`` segments of parameter), so the image is a long
    open polyline whose ends run along ``-e_x``.
    """
    n = curve.n
    R = _frame_to_x(curve.tangents[i])
    half = max(1, window // 2)
    order = (i + half + 1 + np.arange(n - 2 * half - 1)) % n
    q = (curve.points[order] - curve.points[i]) @ R.T
    image = q / np.sum(q * q, axis=1, keepdims=True)
    return OpenCurve(image, np.array([-1.0, 0.0, 0.0]))


def horizontal_excess_length(c: OpenCurve) -> float:
    """Sum of ``(1 - cos theta) * length`` over segments, ``theta`` measured from the asymptote."""
    seg = np.diff(c.points, axis=0)
    length = np.linalg.norm(seg, axis=1)
    return float(np.sum(length - seg @ c.asymptotic_dir))
