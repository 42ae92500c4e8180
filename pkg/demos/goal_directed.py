"""Risk attitude on a goal-directed MDP.

From s1 two actions lead to the absorbing goal s2 with probability 1/2 per
step; "top" costs 1 per step and "bottom" costs 2. Run from the package
root:  python3 demos/goal_directed.py
"""

import pathlib

from riskmdp import (
    UtilitySpec,
    analyze,
    exp_infinite_value,
    linear_infinite_value,
    read_mdp,
    risk_vi_solve,
)
from riskmdp.policy import StationaryPolicy

ROOT = pathlib.Path(__file__).resolve().parent.parent
mdp = read_mdp(ROOT / "fixtures" / "fig1a.mdp")
top = StationaryPolicy.deterministic({"s1": "top", "s2": "stay"})
bottom = StationaryPolicy.deterministic({"s1": "bottom", "s2": "stay"})

# Risk neutral: expected total cost is 2 for top and 4 for bottom.
for name, pi in (("top", top), ("bottom", bottom)):
    print(name, "linear:", linear_infinite_value(mdp, pi)["s1"].token())

# Strongly risk averse (gamma = 1/2): each extra step doubles the disutility
# while only halving in probability, so both policies are worth -inf.
for name, pi in (("top", top), ("bottom", bottom)):
    print(name, "gamma=1/2:", exp_infinite_value(mdp, pi, 0.5)["s1"].token())

# Milder aversion keeps the values finite, and value iteration picks top.
sol = risk_vi_solve(mdp, 0.75)
print("optimal at gamma=3/4:", sol.policy.rule, sol.values.as_dict())

# The existence report for a bounded utility.
bounded = UtilitySpec.piecewise([(-10, -1), (0, 0), (10, 1)])
verdict = analyze(mdp, bounded)
print("bounded utility:", verdict.values_exist, "/", verdict.table2_cell)
for ref, why in verdict.citations:
    print("  ", ref, "-", why)
