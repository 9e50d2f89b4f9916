"""Reference computations that share no code with the package.

Smooth double integrals use analytic parametrisations and tangents on a
fine periodic grid; combinatorial sums enumerate configurations directly;
the second Conway coefficient comes from the Alexander polynomial of the
Wirtinger presentation.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
import sympy as sp


# -- parametric curves with analytic derivatives -------------------------------------

def ellipse(a, b):
    f = lambda t: np.stack([a * np.cos(t), b * np.sin(t), 0 * t], -1)  # noqa: E731
    df = lambda t: np.stack([-a * np.sin(t), b * np.cos(t), 0 * t], -1)  # noqa: E731
    return f, df


def torus(q, R=2.0, r=1.0):
    def f(t):
        rad = R + r * np.cos(q * t)
        return np.stack([rad * np.cos(2 * t), rad * np.sin(2 * t), r * np.sin(q * t)], -1)

    def df(t):
        rad = R + r * np.cos(q * t)
        drad = -q * r * np.sin(q * t)
        return np.stack([drad * np.cos(2 * t) - 2 * rad * np.sin(2 * t),
                         drad * np.sin(2 * t) + 2 * rad * np.cos(2 * t),
                         q * r * np.cos(q * t)], -1)

    return f, df


def fourier(terms):
    def f(t):
        out = np.zeros((len(t), 3))
        for k, a, b in terms:
            out += np.cos(k * t)[:, None] * np.asarray(a) + np.sin(k * t)[:, None] * np.asarray(b)
        return out

    def df(t):
        out = np.zeros((len(t), 3))
        for k, a, b in terms:
            out += k * (-np.sin(k * t)[:, None] * np.asarray(a) + np.cos(k * t)[:, None] * np.asarray(b))
        return out

    return f, df


def _grid(f, df, m, refine=16):
    t = 2 * np.pi * np.arange(m) / m
    p, d = f(t), df(t)
    speed = np.linalg.norm(d, axis=1)
    fine = 2 * np.pi * np.arange(m * refine) / (m * refine)
    sp_fine = np.linalg.norm(df(fine), axis=1)
    h = 2 * np.pi / (m * refine)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * h * (sp_fine + np.roll(sp_fine, -1)))])
    s = cum[::refine][:m]
    return p, d / speed[:, None], speed * 2 * np.pi / m, s, cum[-1]


def parametric_energies(f, df, m=2048, chunk=256):
    """``E``, ``E_cos``, ``E_sin`` and the writhe by a periodic product rule.

    The diagonal entry of each row is replaced by the mean of its two
    neighbours (all four integrands are continuous there).
    """
    p, t, w, s, L = _grid(f, df, m)
    totals = np.zeros(4)
    idx = np.arange(m)
    for start in range(0, m, chunk):
        rows = idx[start:start + chunk]
        diff = p[None, :, :] - p[rows, None, :]
        r2 = np.einsum("ijk,ijk->ij", diff, diff)
        diag = rows[:, None] == idx[None, :]
        r2[diag] = 1.0
        r = np.sqrt(r2)
        u = diff / r[..., None]
        ti = t[rows][:, None, :]
        tj = t[None, :, :]
        # tangent at p_j of the circle through p_i, p_j tangent to t_i at p_i
        tc = 2 * np.einsum("ijk,ijk->ij", np.broadcast_to(ti, u.shape), u)[..., None] * u - ti
        ds = np.abs(s[None, :] - s[rows, None])
        D = np.minimum(ds, L - ds)
        D[diag] = 1.0
        ker = np.stack([
            1 / r2 - 1 / D ** 2,
            (1 - np.clip(np.einsum("ijk,ijk->ij", tc, np.broadcast_to(tj, tc.shape)), -1, 1)) / r2,
            np.linalg.norm(np.cross(tc, np.broadcast_to(tj, tc.shape)), axis=-1) / r2,
            np.einsum("ijk,ijk->ij", diff, np.cross(np.broadcast_to(ti, diff.shape),
                                                     np.broadcast_to(tj, diff.shape))) / (4 * np.pi * r2 * r),
        ])
        for k in range(4):
            blk = ker[k]
            ii, jj = np.nonzero(diag)
            blk[ii, jj] = 0.5 * (blk[ii, (jj - 1) % m] + blk[ii, (jj + 1) % m])
            totals[k] += np.einsum("i,ij,j->", w[rows], blk, w)
    return dict(zip(("e", "ecos", "esin", "writhe"), totals))


# -- conformal angle by circle construction ------------------------------------------

def circle_tangent_at(p1, t1, p2):
    """Unit tangent at ``p2`` of the circle through ``p1`` (tangent ``t1``) and ``p2``.

    Built from the circle's centre and rotation axis, not from reflections.
    """
    t1 = t1 / np.linalg.norm(t1)
    c = p2 - p1
    n = c - np.dot(c, t1) * t1          # in-plane normal direction at p1
    # centre p1 + rho*n_hat with |centre - p2| = rho
    nn = np.linalg.norm(n)
    n_hat = n / nn
    rho = np.dot(c, c) / (2 * np.dot(c, n_hat))
    centre = p1 + rho * n_hat
    axis = np.cross(p1 - centre, t1)
    axis /= np.linalg.norm(axis)
    radial = (p2 - centre) / np.linalg.norm(p2 - centre)
    return np.cross(axis, radial)


def conformal_angle_oracle(p1, t1, p2, t2):
    tc = circle_tangent_at(p1, t1, p2)
    t2 = t2 / np.linalg.norm(t2)
    return math.acos(max(-1.0, min(1.0, float(np.dot(tc, t2)))))


# -- cyclic configuration sums ---------------------------------------------------------

def compositions(total, parts):
    """All tuples of ``parts`` non-negative integers summing to ``total``."""
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev, out = -1, []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(total + parts - 2 - prev)
        yield tuple(out)


def cyclic_configuration_sum(W, pairs):
    """Trapezoid sum over labelled cyclic configurations on an ``N``-point circle.

    Point 1 sits anywhere; the ``2n`` gaps between consecutive points are
    non-negative and add up to ``N``.  Each zero gap halves the weight.
    ``pairs`` uses 1-based positions.
    """
    N = len(W)
    m = 2 * len(pairs)
    total = 0.0
    for gaps in compositions(N, m):
        weight = 0.5 ** sum(g == 0 for g in gaps)
        offs = np.concatenate([[0], np.cumsum(gaps[:-1])])
        for i1 in range(N):
            pos = (i1 + offs) % N
            prod = 1.0
            for a, b in pairs:
                prod *= W[pos[a - 1], pos[b - 1]]
            total += weight * prod
    return total


def strict_configuration_sum(W, pairs):
    """Same over strictly increasing tuples, summed over all rotations of the labels."""
    N = len(W)
    m = 2 * len(pairs)
    total = 0.0
    for tup in itertools.combinations(range(N), m):
        for k in range(m):
            prod = 1.0
            for a, b in pairs:
                prod *= W[tup[(a - 1 + k) % m], tup[(b - 1 + k) % m]]
            total += prod
    return total


# -- chord diagram brute force ---------------------------------------------------------

def chords_cross(c1, c2):
    a, b = sorted(c1)
    return (a < c2[0] < b) != (a < c2[1] < b)


def crossing_pair_count(pairs):
    return sum(chords_cross(p, q) for p, q in itertools.combinations(pairs, 2))


# -- Alexander polynomial of a signed Gauss code ---------------------------------------

def alexander_a2(tokens):
    """Second Conway coefficient from ``tokens = [(cid, over, sign), ...]``.

    Wirtinger relations by Fox calculus: at a crossing with over arc ``k``,
    incoming under arc ``i`` and outgoing arc ``j`` the row is
    ``(1 - t, t, -1)`` for sign +1 and ``(t - 1, 1, -t)`` for sign -1.
    """
    if not tokens:
        return 0
    t = sp.Symbol("t")
    unders = [p for p, tok in enumerate(tokens) if not tok[1]]
    n = len(unders)
    arc_of_pos = {}
    k = n - 1
    for p, tok in enumerate(tokens):
        if not tok[1]:
            k = (k + 1) % n
        arc_of_pos[p] = k
    over_arc = {tokens[p][0]: arc_of_pos[p] for p in range(len(tokens)) if tokens[p][1]}
    M = sp.zeros(n, n)
    for a, p in enumerate(unders):
        cid, _, sign = tokens[p]
        incoming, outgoing, over = (a - 1) % n, a, over_arc[cid]
        if sign > 0:
            row = ((over, 1 - t), (incoming, t), (outgoing, -1))
        else:
            row = ((over, t - 1), (incoming, 1), (outgoing, -t))
        # arcs may coincide (curls), so entries accumulate
        for col, v in row:
            M[a, col] += v
    minor = M[1:, 1:]
    delta = sp.expand(minor.det()) if n > 1 else sp.Integer(1)
    poly = sp.Poly(sp.expand(delta), t)
    coeffs = dict(zip((m[0] for m in poly.monoms()), poly.coeffs()))
    lo, hi = min(coeffs), max(coeffs)
    centre = sp.Rational(lo + hi, 2)
    lap = sum(c * t ** (e - centre) for e, c in coeffs.items())
    if lap.subs(t, 1) < 0:
        lap = -lap
    assert lap.subs(t, 1) == 1
    return int(sp.diff(lap, t, 2).subs(t, 1) / 2)
