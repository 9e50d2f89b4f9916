"""Energy descent on polygonal knots.

Steps follow a finite-difference gradient of a lightweight polygon version
of the chosen energy; a step is accepted only when the accurate quadrature
energy does not increase, otherwise the step size is halved.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .curve import CurveError, KnotCurve, min_nonadjacent_gap, resample_arclength
from .energies import QuadratureConfig, energy_e, energy_ecos, energy_esin

SELECTORS = {"E": "e", "E_cos": "cos", "E_sin": "sin"}
_QUAD = QuadratureConfig(richardson=False)
_EVALUATORS = {"E": energy_e, "E_cos": energy_ecos, "E_sin": energy_esin}


@dataclass(frozen=True)
class FlowConfig:
    """Descent settings.

    ``step_size`` multiplies the gradient of a curve normalised to length
    ``2 pi``; it grows by ``growth`` after each accepted step and halves on
    rejection.  ``gradient`` is the finite-difference step as a fraction of
    the mean edge length.  ``smoothing`` is the order ``s`` of the spectral
    filter ``(1 + k^2)^-s`` applied to the gradient along the curve (0 turns
    it off); the filter is positive definite, so search directions stay
    descent directions.
    """

    energy: str = "E"
    steps: int = 500
    step_size: float = 1.0
    resample_every: int = 10
    gradient: float = 1e-4
    growth: float = 1.25
    min_step: float = 1e-10
    tolerance: float = 0.0
    smoothing: float = 1.0

    def __post_init__(self):
        if self.energy not in SELECTORS:
            raise ValueError(f"energy must be one of {sorted(SELECTORS)}")
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.smoothing < 0:
            raise ValueError("smoothing must be >= 0")
        if self.resample_every < 1:
            raise ValueError("resample_every must be >= 1")


@dataclass
class FlowRecord:
    step: int
    energy: float
    step_size: float
    snapshot: str
    resampled: bool = False

    def to_json(self):
        return asdict(self)


@dataclass
class FlowResult:
    curve: KnotCurve
    records: list
    status: str
    snapshots: dict

    @property
    def energies(self):
        return [r.energy for r in self.records]

    def jsonl(self) -> str:
        return "".join(json.dumps(r.to_json(), sort_keys=True) + "\n" for r in self.records)


def batch_energy(P: np.ndarray, kind: str) -> np.ndarray:
    """Polygon energies of a batch ``(B, N, 3)`` of closed polygons.

    Chord-length weights, second-order tangents, and the band ``|i - j| <= 1``
    left out.  Used only for search directions.
    """
    B, n, _ = P.shape
    seg = np.roll(P, -1, axis=1) - P
    c = np.linalg.norm(seg, axis=2)
    w = 0.5 * (c + np.roll(c, 1, axis=1))
    diff = P[:, None, :, :] - P[:, :, None, :]
    r2 = np.einsum("bijk,bijk->bij", diff, diff)
    off = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    band = np.minimum(off, n - off) <= 1
    r2 = np.where(band, 1.0, r2)
    if kind == "e":
        s = np.concatenate([np.zeros((B, 1)), np.cumsum(c, axis=1)[:, :-1]], axis=1)
        L = c.sum(axis=1)[:, None, None]
        d = np.abs(s[:, None, :] - s[:, :, None])
        D = np.minimum(d, L - d)
        D = np.where(band, 1.0, D)
        K = 1.0 / r2 - 1.0 / D ** 2
    else:
        t = np.roll(P, -1, axis=1) - np.roll(P, 1, axis=1)
        t /= np.linalg.norm(t, axis=2, keepdims=True)
        u = diff / np.sqrt(r2)[..., None]
        ti = t[:, :, None, :]
        up = 2.0 * np.einsum("bijk,bijk->bij", np.broadcast_to(ti, u.shape), u)[..., None] * u - ti
        tj = t[:, None, :, :]
        if kind == "cos":
            dd = up - tj
            K = 0.5 * np.einsum("bijk,bijk->bij", dd, dd) / r2
        else:
            K = np.linalg.norm(np.cross(up, np.broadcast_to(tj, up.shape)), axis=-1) / r2
    K = np.where(band, 0.0, K)
    return np.einsum("bi,bij,bj->b", w, K, w)


def fd_gradient(points: np.ndarray, kind: str, eps: float, chunk: int = 24) -> np.ndarray:
    """Forward-difference gradient of :func:`batch_energy` w.r.t. every coordinate."""
    n = len(points)
    base = batch_energy(points[None], kind)[0]
    grad = np.empty(3 * n)
    coords = np.arange(3 * n)
    for start in range(0, 3 * n, chunk):
        idx = coords[start:start + chunk]
        P = np.repeat(points[None], len(idx), axis=0)
        P[np.arange(len(idx)), idx // 3, idx % 3] += eps
        grad[idx] = (batch_energy(P, kind) - base) / eps
    return grad.reshape(n, 3)


def smooth_gradient(grad: np.ndarray, order: float) -> np.ndarray:
    """Damp Fourier mode ``k`` of a per-vertex field by ``(1 + k^2)^-order``."""
    if order == 0:
        return grad
    spec = np.fft.rfft(grad, axis=0)
    k = np.arange(spec.shape[0])
    spec /= ((1.0 + k * k) ** order)[:, None]
    return np.fft.irfft(spec, n=len(grad), axis=0)


def gauge_fix(points: np.ndarray) -> np.ndarray:
    """Scale to length ``2 pi`` and move the vertex centroid to the origin."""
    length = np.linalg.norm(np.roll(points, -1, axis=0) - points, axis=1).sum()
    p = points * (2.0 * math.pi / length)
    return p - p.mean(axis=0)


def _arclength_shift(old: np.ndarray, new: np.ndarray) -> float:
    """Largest displacement in the straight homotopy between two closed
    polylines matched by normalised arclength from vertex 0."""
    def frac(p):
        seg = np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1)
        s = np.concatenate([[0.0], np.cumsum(seg)])
        return s / s[-1]
    fo, fn = frac(old), frac(new)
    grid = np.union1d(fo, fn)
    co, cn = np.vstack([old, old[:1]]), np.vstack([new, new[:1]])
    a = np.stack([np.interp(grid, fo, co[:, k]) for k in range(3)], axis=1)
    b = np.stack([np.interp(grid, fn, cn[:, k]) for k in range(3)], axis=1)
    return float(np.linalg.norm(a - b, axis=1).max())


def _try_curve(points, gap_ratio):
    try:
        return KnotCurve(points, gap_ratio=gap_ratio)
    except CurveError:
        return None


def relax(curve: KnotCurve, cfg: FlowConfig | None = None, keep_snapshots: int = 0) -> FlowResult:
    """Rejection-controlled descent of the selected energy.

    Returns the final curve and one record per accepted step (record 0 is the
    gauge-fixed input).  The recorded energies never increase.  The loop ends
    after ``cfg.steps`` accepted steps, when the step size underflows
    (``status='stuck'``), or when an accepted step lowers the energy by no
    more than ``cfg.tolerance`` (``status='converged'``).
    """
    cfg = cfg or FlowConfig()
    kind = SELECTORS[cfg.energy]
    evaluate = _EVALUATORS[cfg.energy]
    cur = KnotCurve(gauge_fix(curve.points), gap_ratio=curve.gap_ratio)
    energy = evaluate(cur, _QUAD).value
    records = [FlowRecord(0, energy, cfg.step_size, "snap-0000")]
    snapshots = {"snap-0000": cur} if keep_snapshots else {}
    step = cfg.step_size
    accepted = 0
    status = "max-steps"
    grad = None
    while accepted < cfg.steps:
        if grad is None:
            eps = cfg.gradient * cur.total_length / cur.n
            grad = fd_gradient(cur.points, kind, eps)
            # drop the tangential part; spacing is handled by resampling
            t = cur.tangents
            grad = grad - np.sum(grad * t, axis=1, keepdims=True) * t
            grad = smooth_gradient(grad, cfg.smoothing)
            # vertices moving less than half the strand gap cannot pass through
            # another strand, so the knot type is preserved
            reach = 0.5 * min_nonadjacent_gap(cur.points) / np.linalg.norm(grad, axis=1).max()
        if step < cfg.min_step:
            status = "stuck"
            break
        if step >= reach:
            step *= 0.5
            continue
        moved = gauge_fix(cur.points - step * grad)
        cand = _try_curve(moved, cur.gap_ratio)
        new_energy = evaluate(cand, _QUAD).value if cand is not None else math.inf
        if not new_energy <= energy:
            step *= 0.5
            continue
        resampled = False
        if (accepted + 1) % cfg.resample_every == 0:
            try:
                rs = resample_arclength(cand, cand.n)
                rs = KnotCurve(gauge_fix(rs.points), gap_ratio=cur.gap_ratio)
                rs_energy = evaluate(rs, _QUAD).value
                safe = _arclength_shift(cand.points, rs.points) < 0.5 * min_nonadjacent_gap(cand.points)
                if safe and rs_energy <= new_energy:
                    cand, new_energy, resampled = rs, rs_energy, True
            except CurveError:
                pass
        accepted += 1
        gain = energy - new_energy
        cur, energy = cand, new_energy
        grad = None
        name = f"snap-{accepted:04d}"
        records.append(FlowRecord(accepted, energy, step, name, resampled))
        if keep_snapshots and accepted % keep_snapshots == 0:
            snapshots[name] = cur
        step *= cfg.growth
        if gain <= cfg.tolerance and cfg.tolerance > 0:
            status = "converged"
            break
    if keep_snapshots:
        snapshots[records[-1].snapshot] = cur
    return FlowResult(cur, records, status, snapshots)
