"""Existence and finiteness of expected utilities in finite MDPs."""

from .chain import ClassType, analyze_chain, induced_chain, transient_decay
from .conditions import ConditionReport, check_condition, check_conditions
from .eq2 import decompose_eq2
from .errors import *  # noqa: F401,F403
from .expo import exp_finite_horizon, exp_infinite_value, exp_matrix, hat_decompose
from .extreme import extreme_total_reward
from .horizon import finite_horizon_eu
from .linear import linear_infinite_value
from .mdp import Mdp, parse_mdp, read_mdp, reward_sign, signed_part, validate
from .outcome import ValueOutcome, ValueVector
from .policy import StationaryPolicy, enumerate_sd_policies, parse_policy
from .probe import classify_sequence, limit_probe
from .simulate import SimEstimate, sample_eu
from .solve import risk_vi_solve
from .utility import UtilitySpec, evaluate_utility, lottery_eu, parse_utility
from .verdict import ExistenceVerdict, analyze

__version__ = "0.1.0"
