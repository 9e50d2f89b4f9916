"""Crossing statistics of random plane projections against the Gauss
double integrals that predict them.

Run:  python3 demos/crossings.py
"""
from knotenergy.diagrams import conway_a2_skein
from knotenergy.gauss import CHORD, X, gauss_functional, writhe
from knotenergy.projections import (average_crossing_number, average_writhe, average_x_crossing,
                                    code_from_projection, generic_direction)
from knotenergy.zoo import sample_zoo

for spec in ("torus2q:q=3,n=192", "figure8:n=192"):
    curve = sample_zoo(spec)
    cs = generic_direction(curve, seed=0)
    code = code_from_projection(cs)
    print(f"{spec}: one random view has {cs.count} crossings, code {code}")
    print(f"  skein coefficient of that code: {conway_a2_skein(code, max_crossings=30)}")
    rows = [("writhe", writhe(curve), average_writhe(curve, 1000, seed=1)),
            ("crossings", gauss_functional(curve, CHORD, signed=False),
             average_crossing_number(curve, 1000, seed=1)),
            ("X-crossings", gauss_functional(curve, X, signed=False),
             average_x_crossing(curve, 1000, seed=1))]
    for name, grid, mc in rows:
        print(f"  {name:12s} integral {grid.value:8.4f}   average over views "
              f"{mc.value:8.4f} +- {mc.error:.4f}")
