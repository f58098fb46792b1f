"""Threshold rules, oracles and simulators for stop-on-the-last-success problems."""

from .errors import AssumptionError, GuardError, StopruleError
from .ferguson import SlaModel, SlaStop, bernoulli_sla, monotone_check, one_sla_stop
from .markov import (
    MarkovPolicy,
    MarkovSpec,
    TamakiSpec,
    hy_homogeneous_policy,
    hy_nonhomogeneous_policy,
    markov_policy_value,
    tamaki_markov_threshold,
)
from .multi_select import HTable, MultiSelectRule, h_table, multi_select_rule
from .multiplicative import (
    MultiOddsTable,
    last_m_threshold,
    last_m_value,
    mth_last_threshold,
    multi_odds,
)
from .odds import (
    INFINITE_ODDS,
    ONE_OVER_E,
    OddsSequence,
    OneOverECheck,
    StoppingPolicy,
    ThresholdRule,
    dice,
    grouped,
    one_over_e_check,
    secretary,
    threshold,
    time_embedded,
    win_probability,
    with_availability,
)
from .lap import (
    ArrivalTrace,
    LapModel,
    LapOutcome,
    PiMartingaleReport,
    lap_decide,
    lap_play,
    lap_win_estimate,
    pi_martingale_check,
    simulate_poisson,
    thin,
)
from .montecarlo import (
    AdaptivePolicy,
    EmpiricalOddsPolicy,
    SimulationReport,
    compare,
    empirical_odds_policy,
    simulate,
    wilson_interval,
)
from .verify import Objective, OracleResult, dp_optimal, dp_optimal_markov, enumerate_policy_value

__version__ = "0.1.0"

__all__ = [
    "AssumptionError",
    "GuardError",
    "StopruleError",
    "INFINITE_ODDS",
    "ONE_OVER_E",
    "OddsSequence",
    "OneOverECheck",
    "StoppingPolicy",
    "ThresholdRule",
    "dice",
    "grouped",
    "one_over_e_check",
    "secretary",
    "threshold",
    "time_embedded",
    "win_probability",
    "with_availability",
    "MultiOddsTable",
    "multi_odds",
    "mth_last_threshold",
    "last_m_threshold",
    "last_m_value",
    "HTable",
    "MultiSelectRule",
    "h_table",
    "multi_select_rule",
    "MarkovSpec",
    "MarkovPolicy",
    "TamakiSpec",
    "hy_homogeneous_policy",
    "hy_nonhomogeneous_policy",
    "tamaki_markov_threshold",
    "markov_policy_value",
    "SlaModel",
    "SlaStop",
    "one_sla_stop",
    "monotone_check",
    "bernoulli_sla",
    "Objective",
    "OracleResult",
    "dp_optimal",
    "dp_optimal_markov",
    "enumerate_policy_value",
    "ArrivalTrace",
    "LapModel",
    "LapOutcome",
    "PiMartingaleReport",
    "lap_decide",
    "lap_play",
    "lap_win_estimate",
    "pi_martingale_check",
    "simulate_poisson",
    "thin",
    "AdaptivePolicy",
    "EmpiricalOddsPolicy",
    "SimulationReport",
    "compare",
    "empirical_odds_policy",
    "simulate",
    "wilson_interval",
]
