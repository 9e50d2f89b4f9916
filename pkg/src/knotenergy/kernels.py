"""Pair kernels on a discretized curve and the quadrature rules built on them.

Every pairwise integrand used by the energies and Gauss functionals is
evaluated on the vertex grid.  Kernels that are bounded but not evaluable
on the diagonal get the band ``|i - j| <= skip`` filled by linear
extrapolation from offsets ``skip + 1`` and ``skip + 2`` of the same row.
"""
from __future__ import annotations

import math

import numpy as np

KINDS = ("e", "cos", "sin", "gauss")
ROW_CHUNK = 256


def reflect(u, w):
    """Reflection of ``u`` across the line spanned by unit ``w``."""
    return 2.0 * np.sum(u * w, axis=-1, keepdims=True) * w - u


def _row_block(curve, rows, kinds, skip):
    n = curve.n
    p = curve.points
    t = curve.tangents
    cols = np.arange(n)
    off = (cols[None, :] - rows[:, None]) % n
    off = np.minimum(off, n - off)
    band = off <= skip
    d = p[None, :, :] - p[rows, None, :]
    r2 = np.einsum('ijk,ijk->ij', d, d)
    r2 = np.where(band, 1.0, r2)
    out = {}
    if "e" in kinds:
        s = curve.cumlen[:-1]
        arc = np.abs(s[None, :] - s[rows, None])
        arc = np.minimum(arc, curve.total_length - arc)
        arc = np.where(band, 1.0, arc)
        out["e"] = 1.0 / r2 - 1.0 / arc ** 2
    if "cos" in kinds or "sin" in kinds:
        w = d / np.sqrt(r2)[..., None]
        up = reflect(np.broadcast_to(t[rows, None, :], w.shape), w)
        if "cos" in kinds:
            diff = up - t[None, :, :]
            out["cos"] = 0.5 * np.einsum('ijk,ijk->ij', diff, diff) / r2
        if "sin" in kinds:
            out["sin"] = np.linalg.norm(np.cross(up, t[None, :, :]), axis=-1) / r2
    if "gauss" in kinds:
        tt = np.cross(t[rows, None, :], t[None, :, :])
        out["gauss"] = np.einsum('ijk,ijk->ij', d, tt) / (4.0 * math.pi * r2 ** 1.5)
    for k in out:
        out[k] = _fill_band(out[k], rows, n, skip)
    return out


def _fill_band(block, rows, n, skip):
    block = np.array(block)
    r = np.arange(len(rows))
    ext = []
    for sign in (1, -1):
        v1 = block[r, (rows + sign * (skip + 1)) % n]
        v2 = block[r, (rows + sign * (skip + 2)) % n]
        ext.append((v1, v2))
        for k in range(1, skip + 1):
            block[r, (rows + sign * k) % n] = v1 + (v1 - v2) * (skip + 1 - k)
    block[r, rows] = 0.5 * sum(v1 + (v1 - v2) * (skip + 1) for v1, v2 in ext)
    return block


def kernel_matrix(curve, kind, skip=1):
    """Full N x N matrix of one kernel (band filled)."""
    if kind not in KINDS:
        raise ValueError(f"unknown kernel {kind!r}")
    n = curve.n
    out = np.empty((n, n))
    for start in range(0, n, ROW_CHUNK):
        rows = np.arange(start, min(n, start + ROW_CHUNK))
        out[rows] = _row_block(curve, rows, (kind,), skip)[kind]
    return out


def kernel_row(curve, i, kind, skip=1):
    """Row ``i`` of :func:`kernel_matrix` without building the full matrix."""
    return _row_block(curve, np.array([int(i) % curve.n]), (kind,), skip)[kind][0]


def weighted_double_sums(curve, kinds, skip=1, absolute=()):
    """``sum_ij w_i K_ij w_j`` for each kernel, accumulated in row chunks.

    Kernels listed in ``absolute`` are summed in absolute value as well, under
    the key ``'|kind|'``.
    """
    n = curve.n
    w = curve.weights
    totals = {k: 0.0 for k in kinds}
    for k in absolute:
        totals[f"|{k}|"] = 0.0
    for start in range(0, n, ROW_CHUNK):
        rows = np.arange(start, min(n, start + ROW_CHUNK))
        blocks = _row_block(curve, rows, kinds, skip)
        for k, b in blocks.items():
            totals[k] += float(w[rows] @ b @ w)
            if k in absolute:
                totals[f"|{k}|"] += float(w[rows] @ np.abs(b) @ w)
    return totals


def interleaved_sum(W):
    """Trapezoidal sum of ``W[u1, u3] * W[u2, u4]`` over cyclically ordered 4-tuples.

    ``W`` must be symmetric.  Configurations where neighbouring points of the
    cyclic order coincide sit on a boundary face of the configuration space
    and are weighted by 1/2 per coincidence.  Runs in O(N^2) using prefix
    sums over the arcs cut out by the chord ``(u1, u3)``.
    """
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    P = np.zeros((n + 1, n + 1))
    P[1:, 1:] = W.cumsum(0).cumsum(1)
    rowp = np.zeros((n, n + 1))
    rowp[:, 1:] = W.cumsum(1)
    r = W.sum(1)
    rp = np.concatenate([[0.0], np.cumsum(r)])
    a = np.arange(n)[:, None]
    c = np.arange(n)[None, :]
    lo = np.minimum(a, c)
    hi = np.maximum(a, c)
    # mu = indicator of the closed arc [lo, hi] with half weight at both ends;
    # cross = mu^T W (1 - mu)
    mu_r = rp[hi + 1] - rp[lo] - 0.5 * (r[lo] + r[hi])
    sq = P[hi + 1, hi + 1] - P[lo, hi + 1] - P[hi + 1, lo] + P[lo, lo]
    row_lo = rowp[lo, hi + 1] - rowp[lo, lo]
    row_hi = rowp[hi, hi + 1] - rowp[hi, lo]
    diag = np.diag(W)
    mu_w_mu = sq - row_lo - row_hi + 0.25 * (diag[lo] + 2.0 * W[lo, hi] + diag[hi])
    cross = mu_r - mu_w_mu
    np.fill_diagonal(cross, 0.0)
    return float((W * cross).sum())


def brute_interleaved_sum(W):
    """O(N^4) reference for :func:`interleaved_sum` by explicit enumeration."""
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    idx = np.arange(n)
    total = 0.0
    for a in range(n):
        b, c, d = np.meshgrid(idx, idx, idx, indexing='ij')
        g1 = (b - a) % n
        g2 = (c - b) % n
        g3 = (d - c) % n
        g4 = (a - d) % n
        ok = (g1 + g2 + g3 + g4 == n) & (c != a) & (d != b)
        weight = np.where(ok, 1.0, 0.0)
        for g in (g1, g2, g3, g4):
            weight = weight * np.where(g == 0, 0.5, 1.0)
        total += float((weight * W[a, c] * W[b, d]).sum())
    return total
