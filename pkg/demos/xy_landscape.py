"""Stationary points of small XY lattices, three ways.

First a gauge-fixed 4-site ring solved with Newton and with homotopy
tracking, then a disordered 3x3 lattice attacked through the squared
gradient norm, which is where spurious minima show up.
"""
import numpy as np

import spbench as sb

ring = sb.XYLattice(1, 4)
print("ring:", ring.label, "n =", ring.n)

for method, seed in (("newton", 21), ("homotopy", 22)):
    cfg = sb.SolverConfig(method=method, starts=400, seed=seed,
                          accept_tol=1e-13)
    res = sb.multistart(ring, cfg)
    isolated = [sp for sp in res.solutions.points if not sp.singular]
    print("%-8s %s" % (method, res.stats))
    for sp in sorted(isolated, key=lambda s: s.energy):
        shown = np.mod(sp.point, 2.0 * np.pi)
        shown[shown > 2.0 * np.pi - 1e-9] = 0.0
        print("    H = %8.5f  index %d  at %s"
              % (sp.energy, sp.index, np.round(shown, 6)))
    print("    singular points kept aside:",
          sum(1 for sp in res.solutions.points if sp.singular))

# quenched random couplings; descent on W = |grad H|^2 can stall at points
# that are not stationary points of H at all
disordered = sb.XYLattice(2, 3, disorder="uniform-signed", seed=1)
print()
print("disordered:", disordered.label, "n =", disordered.n)
cfg = sb.SolverConfig(method="gradsq", starts=200, seed=7, max_iters=1500)
res = sb.multistart(disordered, cfg)
print(res.stats)
spurious = [o for o in res.outcomes if o.status is sb.Status.SPURIOUS_MINIMUM]
if spurious:
    worst = max(spurious, key=lambda o: o.residual_norm)
    print("example spurious minimum: |grad H| = %.3e after %d iterations"
          % (worst.residual_norm, worst.iterations))
