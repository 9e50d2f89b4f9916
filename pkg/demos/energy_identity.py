"""Energies of a few closed curves, the constant gap between E and E_cos,
and what happens when the curve is pushed through a sphere inversion.

Run:  python3 demos/energy_identity.py
"""
import numpy as np

from knotenergy.energies import pair_energies
from knotenergy.mobius import random_far_inversion, transform_curve
from knotenergy.zoo import sample_zoo

CURVES = ["circle:n=512", "ellipse:a=2,b=1,n=512", "torus2q:q=3,n=512", "figure8:n=512"]

print(f"{'curve':28s} {'E':>10s} {'E_cos':>10s} {'E - E_cos':>10s} {'E_sin':>10s}")
for spec in CURVES:
    r = pair_energies(sample_zoo(spec))
    e, ec, es = r["e"].value, r["ecos"].value, r["esin"].value
    print(f"{spec:28s} {e:10.5f} {ec:10.5f} {e - ec:10.5f} {es:10.5f}")

# The round circle is the only curve with E_cos = 0; every other curve pays
# a positive amount on top of the constant 4 that E carries.

print("\nsphere inversions far from the trefoil:")
curve = sample_zoo("torus2q:q=3,n=192")
base = pair_energies(curve)
rng = np.random.default_rng(1)
for k in range(3):
    moved = transform_curve(random_far_inversion(curve, rng), curve)
    r = pair_energies(moved)
    print(f"  draw {k}: E_cos {r['ecos'].value:9.4f} (was {base['ecos'].value:9.4f})   "
          f"E_sin {r['esin'].value:9.4f} (was {base['esin'].value:9.4f})")
