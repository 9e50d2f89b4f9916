"""Möbius-invariant knot energies by grid quadrature.

All five energies are evaluated on the vertex grid of a uniformly sampled
curve with weights ``curve.weights``.  The error estimate attached to each
result is the Richardson difference ``|v(N) - v(N/2)|`` where the coarse
value uses every other vertex.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .curve import KnotCurve, MIN_POINTS
from .kernels import interleaved_sum, kernel_matrix, kernel_row, weighted_double_sums
from .report import FunctionalReport, combined_error


@dataclass(frozen=True)
class QuadratureConfig:
    """Grid quadrature options.

    Parameters
    ----------
    diagonal_skip : int
        Neighbour offsets ``|i - j| <= diagonal_skip`` are not evaluated
        directly; their kernel values are extrapolated from the next two
        offsets.
    richardson : bool
        Also evaluate on the half grid and report the difference as error.
    """

    diagonal_skip: int = 1
    richardson: bool = True

    def __post_init__(self):
        if self.diagonal_skip < 1:
            raise ValueError("diagonal_skip must be >= 1")


DEFAULT_QUAD = QuadratureConfig()

PAIR_KINDS = {"e": "e", "ecos": "cos", "esin": "sin"}


def half_grid(curve: KnotCurve) -> KnotCurve | None:
    """Every other vertex of ``curve``, or None when too coarse."""
    if curve.n // 2 < MIN_POINTS:
        return None
    return KnotCurve(curve.points[::2], gap_ratio=curve.gap_ratio, validate=False)


def _pair_values(curve, names, skip):
    kinds = [PAIR_KINDS[k] for k in names]
    sums = weighted_double_sums(curve, kinds, skip=skip)
    return {name: sums[PAIR_KINDS[name]] for name in names}


def _x_value(curve, kind, skip):
    w = curve.weights
    W = kernel_matrix(curve, kind, skip) * w[:, None] * w[None, :]
    W = 0.5 * (W + W.T)
    np.fill_diagonal(W, 0.0)
    return interleaved_sum(W)


def pair_energies(curve: KnotCurve, cfg: QuadratureConfig | None = None,
                  which=("e", "ecos", "esin")) -> dict:
    """Evaluate several pair energies sharing one pass over the kernels."""
    cfg = cfg or DEFAULT_QUAD
    fine = _pair_values(curve, which, cfg.diagonal_skip)
    coarse_curve = half_grid(curve) if cfg.richardson else None
    coarse = (_pair_values(coarse_curve, which, cfg.diagonal_skip)
              if coarse_curve is not None else None)
    out = {}
    for name in which:
        err = abs(fine[name] - coarse[name]) if coarse else 0.0
        out[name] = FunctionalReport(fine[name], err, f"grid-{name}", curve.n,
                                     asdict(cfg))
    return out


def energy_e(curve: KnotCurve, cfg: QuadratureConfig | None = None) -> FunctionalReport:
    """Möbius energy: the regularized inverse-square chord integral.

    Kernel ``1/|p_j - p_i|^2 - 1/D_ij^2`` with ``D`` the intrinsic distance.
    Equals 4 on round circles.
    """
    return pair_energies(curve, cfg, ("e",))["e"]


def energy_ecos(curve: KnotCurve, cfg: QuadratureConfig | None = None) -> FunctionalReport:
    """Cosine energy with kernel ``(1 - cos a) / |p_j - p_i|^2``, ``a`` the conformal angle."""
    return pair_energies(curve, cfg, ("ecos",))["ecos"]


def energy_esin(curve: KnotCurve, cfg: QuadratureConfig | None = None) -> FunctionalReport:
    """Sine energy with kernel ``sin a / |p_j - p_i|^2``."""
    return pair_energies(curve, cfg, ("esin",))["esin"]


def _x_energy(curve, kind, cfg, tag):
    cfg = cfg or DEFAULT_QUAD
    fine = _x_value(curve, kind, cfg.diagonal_skip)
    coarse_curve = half_grid(curve) if cfg.richardson else None
    err = 0.0
    if coarse_curve is not None:
        err = abs(fine - _x_value(coarse_curve, kind, cfg.diagonal_skip))
    return FunctionalReport(fine, err, tag, curve.n, asdict(cfg))


def energy_ecos_x(curve: KnotCurve, cfg: QuadratureConfig | None = None) -> FunctionalReport:
    """X-energy built from the cosine kernel on interleaved chord pairs.

    Sums ``K(u1, u3) K(u2, u4)`` over cyclically ordered 4-tuples, exactly,
    in O(N^2).
    """
    return _x_energy(curve, "cos", cfg, "grid-ecosx")


def energy_esin_x(curve: KnotCurve, cfg: QuadratureConfig | None = None) -> FunctionalReport:
    """X-energy built from the sine kernel on interleaved chord pairs."""
    return _x_energy(curve, "sin", cfg, "grid-esinx")


ENERGIES = {
    "e": energy_e,
    "ecos": energy_ecos,
    "esin": energy_esin,
    "ecosx": energy_ecos_x,
    "esinx": energy_esin_x,
}


def doyle_schramm_residual(curve: KnotCurve, cfg: QuadratureConfig | None = None):
    """Return ``(E - E_cos - 4, combined error)``."""
    r = pair_energies(curve, cfg, ("e", "ecos"))
    return r["e"].value - r["ecos"].value - 4.0, combined_error(r["e"], r["ecos"])


def excess_kernel_row(curve: KnotCurve, i: int, skip: int = 1) -> float:
    """Inner cosine-energy integral at vertex ``i``: ``sum_j K_ij w_j``."""
    return float(kernel_row(curve, i, "cos", skip) @ curve.weights)


def crossing_bound_from_esin(value: float) -> float:
    """Upper bound on the crossing number implied by a sine-energy value."""
    return value / (4.0 * math.pi)


def x_crossing_bound_from_esinx(value: float) -> float:
    """Upper bound on the X-crossing number implied by a sine X-energy value."""
    return 0.5 * value / (4.0 * math.pi) ** 2
