"""Energy descent: a wobbly unknot relaxes to the round circle, and a
trefoil settles into its own minimiser without changing knot type.

Run:  python3 demos/relaxation.py
"""
from knotenergy.diagrams import conway_a2_skein
from knotenergy.flow import FlowConfig, relax
from knotenergy.projections import code_from_projection, generic_direction
from knotenergy.zoo import sample_zoo

for spec, steps in (("perturbed_circle:amp=0.1,mode=5,n=128", 40), ("torus2q:q=3,n=128", 40)):
    res = relax(sample_zoo(spec), FlowConfig(steps=steps))
    e = res.energies
    marks = ", ".join(f"{e[k]:.4f}" for k in range(0, len(e), 10))
    print(f"{spec}\n  E every 10 steps: {marks}\n  final {e[-1]:.5f} after {len(e) - 1} "
          f"accepted steps (status {res.status})")
    code = code_from_projection(generic_direction(res.curve, seed=0))
    print(f"  knot coefficient after the flow: {conway_a2_skein(code, max_crossings=30)}")
