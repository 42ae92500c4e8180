"""A transient two-cycle whose exponential utility never settles.

s1 and s2 swap with probability 1/2 and otherwise fall into s3, which
costs 1 per step. With gamma = 2 the finite-horizon values alternate
between two limits, so no infinite-horizon value exists even though the
linear expected total reward converges.
"""

import pathlib

import numpy as np

from riskmdp import check_condition, exp_infinite_value, finite_horizon_eu, read_mdp
from riskmdp.policy import StationaryPolicy
from riskmdp.simulate import sample_eu
from riskmdp.utility import UtilitySpec

ROOT = pathlib.Path(__file__).resolve().parent.parent
mdp = read_mdp(ROOT / "fixtures" / "fig3a.mdp")
pi = StationaryPolicy.deterministic({s: "go" for s in mdp.states})
u = UtilitySpec.exponential(2)

horizons = np.arange(1, 13)
series = np.array([finite_horizon_eu(mdp, pi, u, int(T))["s1"] for T in horizons])
print("v_T(s1):", np.round(series, 4))
print("even T ->", series[1::2][-1], " odd T ->", series[0::2][-1])

print({s: o.token() for s, o in exp_infinite_value(mdp, pi, 2).items()})
print("C5:", check_condition(mdp, u, "C5").status)
print("C10:", check_condition(mdp, u, "C10").status)

# Sampling agrees with the exact finite-horizon value.
est = sample_eu(mdp, pi, "s1", u, 2, 100_000, seed=0)
print(f"T=2 estimate {est.mean:.4f} +- {est.stderr:.4f} (exact 2)")
