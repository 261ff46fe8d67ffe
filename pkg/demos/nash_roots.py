"""Roots of the stationarity system of a game versus actual equilibria.

The polynomial system vanishes at every support-consistent profile, so the
solver returns a superset of the equilibria; is_equilibrium separates them
by checking feasibility and payoff margins.
"""
import numpy as np

import spbench as sb

for name, game in (("matching pennies", sb.matching_pennies()),
                   ("prisoner's dilemma", sb.prisoners_dilemma())):
    inst = sb.NashInstance(game)
    res = sb.multistart(inst, sb.SolverConfig(method="newton",
                                              starts=100, seed=11))
    print(name, "->", len(res.solutions), "distinct roots")
    for sp in res.solutions.points:
        probs, pis = inst.split(sp.point)
        flag, report = sb.is_equilibrium(game, probs, pis)
        tag = "equilibrium" if flag else ("rejected, margin %+.3f"
                                          % report["min_payoff_margin"])
        print("    p1 %s  p2 %s  payoffs %s  %s"
              % (np.round(probs[0], 4), np.round(probs[1], 4),
                 np.round(pis, 4), tag))
    print()

rng = np.random.default_rng(3)
pay_a = rng.uniform(-1.0, 1.0, (2, 2))
pay_b = rng.uniform(-1.0, 1.0, (2, 2))
game = sb.NashGame([pay_a, pay_b])
inst = sb.NashInstance(game)
res = sb.multistart(inst, sb.SolverConfig(method="newton", starts=50, seed=2))
eqs = []
for sp in res.solutions.points:
    probs, pis = inst.split(sp.point)
    if sb.is_equilibrium(game, probs, pis)[0]:
        eqs.append((probs, pis))
print("random 2x2 game: %d roots, %d equilibria" % (len(res.solutions),
                                                    len(eqs)))
for probs, pis in eqs:
    print("    p1 %s  p2 %s" % (np.round(probs[0], 4), np.round(probs[1], 4)))
