"""Named families of test curves.

Specs are parsed from strings like ``"torus2q:q=3,R=2,r=1,n=512"``; every
family is sampled uniformly in arclength.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .curve import CurveError, KnotCurve, sample_parametric, sample_polyline
from .diagrams import Layered, _step, twist_layered

FIGURE8_TERMS = [
    [1, [0.5, 0.0, 0.0], [0.0, 0.5, 0.0]],
    [3, [2.0, 0.0, 0.0], [0.0, 2.0, 0.0]],
    [4, [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
    [5, [0.5, 0.0, 0.0], [0.0, 0.5, 0.0]],
]

DEFAULTS = {
    "circle": {"r": 1.0},
    "ellipse": {"a": 2.0, "b": 1.0},
    "torus2q": {"q": 3, "R": 2.0, "r": 1.0},
    "twist": {"k": 2, "h": 0.35, "smooth": 0.15},
    "fourier": {"terms": FIGURE8_TERMS},
    "figure8": {},
    "perturbed_circle": {"amp": 0.05, "mode": 7, "seed": 1},
}
INTEGER_PARAMS = {"q", "k", "mode", "seed", "n"}


@dataclass(frozen=True)
class ZooSpec:
    """Family name, its parameters, and the number of samples."""

    family: str
    params: dict = field(default_factory=dict)
    n: int = 256

    def __post_init__(self):
        if self.family not in DEFAULTS:
            raise ValueError(f"unknown curve family {self.family!r}; "
                             f"choose from {', '.join(sorted(DEFAULTS))}")
        merged = dict(DEFAULTS[self.family])
        unknown = set(self.params) - set(merged)
        if unknown:
            raise ValueError(f"unknown parameters for {self.family}: {sorted(unknown)}")
        merged.update(self.params)
        object.__setattr__(self, 'params', merged)
        if self.n < 16:
            raise ValueError("need n >= 16 samples")
        for key in ("r", "a", "b", "R", "h", "smooth"):
            if key in merged and not merged[key] > 0:
                raise ValueError(f"parameter {key} must be positive")
        if self.family == "torus2q" and (merged["q"] < 3 or merged["q"] % 2 == 0):
            raise ValueError("torus2q needs an odd q >= 3")
        if self.family == "torus2q" and not merged["r"] < merged["R"]:
            raise ValueError("torus2q needs r < R")
        if self.family == "twist" and merged["k"] < 1:
            raise ValueError("twist needs k >= 1")
        if self.family == "perturbed_circle" and (merged["mode"] < 2 or merged["amp"] < 0):
            raise ValueError("perturbed_circle needs mode >= 2 and amp >= 0")

    def __str__(self):
        items = [f"{k}={json.dumps(v) if isinstance(v, list) else v}" for k, v in self.params.items()]
        return f"{self.family}:" + ",".join(items + [f"n={self.n}"])


def _split_top(text):
    depth, cur, out = 0, [], []
    for ch in text:
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
            continue
        depth += ch in "[("
        depth -= ch in "])"
        cur.append(ch)
    if cur:
        out.append("".join(cur))
    return out


def parse_zoo(text: str) -> ZooSpec:
    """Parse ``family:key=value,...``; ``n`` sets the sample count."""
    family, _, rest = text.strip().partition(":")
    family = {"figure-eight": "figure8", "figure_eight": "figure8"}.get(family, family)
    params = {}
    n = 256
    for item in _split_top(rest) if rest else []:
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep:
            raise ValueError(f"expected key=value, got {item!r}")
        value = value.strip()
        if value.startswith("["):
            parsed = json.loads(value)
        elif key in INTEGER_PARAMS:
            parsed = int(value)
        else:
            parsed = float(value)
        if key == "n":
            n = parsed
        else:
            params[key] = parsed
    return ZooSpec(family, params, n)


# -- parameterizations ------------------------------------------------------------

def fourier_curve(terms):
    """Map ``t -> sum_k a_k cos(k t) + b_k sin(k t)`` for ``terms = [[k, a_k, b_k], ...]``."""
    rows = [(int(k), np.asarray(a, float), np.asarray(b, float)) for k, a, b in terms]

    def fn(t):
        t = np.asarray(t, dtype=float)[:, None]
        out = np.zeros((t.shape[0], 3))
        for k, a, b in rows:
            out += np.cos(k * t) * a + np.sin(k * t) * b
        return out

    return fn


def torus_curve(q, R, r):
    def fn(t):
        rad = R + r * np.cos(q * t)
        return np.stack([rad * np.cos(2 * t), rad * np.sin(2 * t), r * np.sin(q * t)], axis=-1)
    return fn


def perturbed_circle_curve(amp, mode, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(3)
    b = rng.standard_normal(3)
    a /= np.linalg.norm(a)
    b /= np.linalg.norm(b)

    def fn(t):
        t = np.asarray(t, dtype=float)[:, None]
        base = np.concatenate([np.cos(t), np.sin(t), np.zeros_like(t)], axis=1)
        return base + amp * (np.cos(mode * t) * a + np.sin(mode * t) * b)

    return fn


def layered_polyline(diagram: Layered, h: float = 0.35, per_step: int = 16) -> np.ndarray:
    """Space polygon whose projection to the xy-plane is the layered diagram.

    Strand positions sit one unit apart in x, levels one unit apart in -y.
    Over-strands bulge to ``+h`` in z at a crossing, under-strands to ``-h``.
    Plat caps and cups are half circles.
    """
    if diagram.closure != "plat":
        raise ValueError("geometric realisation supports plat closures only")
    word, depth = diagram.word, len(diagram.word)
    s = (np.arange(per_step) + 0.5) / per_step
    ease = 0.5 - 0.5 * np.cos(math.pi * s)
    pts = []
    level, pos, down = 0, 0, True
    start = (level, pos, down)
    while True:
        if down and level == depth or not down and level == 0:
            other = pos ^ 1
            sgn = -1.0 if level == depth else 1.0
            theta = math.pi * s
            cx = 0.5 * (pos + other)
            x = cx + (pos - cx) * np.cos(theta)
            y = -level + sgn * 0.5 * np.sin(theta)
            pts.append(np.stack([x, y, np.zeros_like(x)], axis=1))
            pos, down = other, not down
        else:
            new_level, new_pos, info = _step(word, level, pos, down)
            x = pos + (new_pos - pos) * ease
            y = -(level + (new_level - level) * s)
            z = np.zeros_like(s) if info is None else (h if info[1] else -h) * np.sin(math.pi * s)
            pts.append(np.stack([x, y, z], axis=1))
            level, pos = new_level, new_pos
        if (level, pos, down) == start:
            break
    return np.concatenate(pts)


def smooth_closed(points, sigma: float, dense: int = 4096) -> np.ndarray:
    """Gaussian smoothing along arclength of a closed polyline."""
    closed = np.vstack([points, points[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    target = np.arange(dense) * s[-1] / dense
    uniform = np.stack([np.interp(target, s, closed[:, k]) for k in range(3)], axis=1)
    return gaussian_filter1d(uniform, sigma * dense / s[-1], axis=0, mode="wrap")


def twist_polyline(k: int, h: float = 0.35, smooth: float = 0.15) -> np.ndarray:
    return smooth_closed(layered_polyline(twist_layered(k), h), smooth)


def sample_zoo(spec: ZooSpec | str) -> KnotCurve:
    """Sample the named curve at ``spec.n`` points, uniform in arclength."""
    if isinstance(spec, str):
        spec = parse_zoo(spec)
    p, n, fam = spec.params, spec.n, spec.family
    if fam == "circle":
        fn = lambda t: p["r"] * np.stack([np.cos(t), np.sin(t), 0 * t], axis=-1)  # noqa: E731
    elif fam == "ellipse":
        fn = lambda t: np.stack([p["a"] * np.cos(t), p["b"] * np.sin(t), 0 * t], axis=-1)  # noqa: E731
    elif fam == "torus2q":
        fn = torus_curve(p["q"], p["R"], p["r"])
    elif fam == "fourier":
        fn = fourier_curve(p["terms"])
    elif fam == "figure8":
        fn = fourier_curve(FIGURE8_TERMS)
    elif fam == "perturbed_circle":
        fn = perturbed_circle_curve(p["amp"], p["mode"], p["seed"])
    elif fam == "twist":
        return sample_polyline(twist_polyline(p["k"], p["h"], p["smooth"]), n)
    else:  # pragma: no cover - guarded by ZooSpec
        raise CurveError(f"unknown family {fam}")
    return sample_parametric(fn, n)


ZOO_KNOT_TYPES = {
    "circle": "unknot",
    "ellipse": "unknot",
    "perturbed_circle": "unknot",
    "figure8": "figure-eight",
}


def knot_name(spec: ZooSpec) -> str:
    """Diagram family name matching ``spec`` for the skein oracle."""
    if spec.family == "torus2q":
        return f"torus2q({spec.params['q']})"
    if spec.family == "twist":
        return f"twist({spec.params['k']})"
    if spec.family == "fourier" and spec.params["terms"] == FIGURE8_TERMS:
        return "figure-eight"
    if spec.family in ZOO_KNOT_TYPES:
        return ZOO_KNOT_TYPES[spec.family]
    raise ValueError(f"no diagram known for {spec.family}")
