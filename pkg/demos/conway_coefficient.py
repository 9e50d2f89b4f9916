"""The second Conway coefficient twice over: once from a knot diagram by
the skein relation and once from two configuration-space integrals.

The volume integral is Monte Carlo; 10^6 draws take a few seconds per knot
and already round to the right integer.

Run:  python3 demos/conway_coefficient.py
"""
from knotenergy.diagrams import conway_a2_skein, zoo_code
from knotenergy.gauss import MCConfig, conway_a2_geometric
from knotenergy.zoo import sample_zoo

for spec, name in (("circle:n=96", "unknot"), ("torus2q:q=3,n=96", "torus2q(3)"),
                   ("figure8:n=96", "figure-eight")):
    r = conway_a2_geometric(sample_zoo(spec), mc=MCConfig(samples=1_000_000, seed=3))
    print(f"{name:13s} skein {conway_a2_skein(zoo_code(name)):+d}   integrals "
          f"{r.value:+.4f} +- {r.error:.4f}   (I_X = {r.config['i_x']:.4f}, "
          f"I_Y = {r.config['i_y']:.4f})")
