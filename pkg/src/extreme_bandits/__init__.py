"""Extreme bandits: find the arm with the heaviest tail under bandit feedback."""

from .distributions import (
    DiracMixture,
    EmpiricalReplay,
    ExactPareto,
    Frechet,
    RngStream,
    SecondOrderParetoParams,
    check_second_order_pareto,
    quantile,
    sample,
    survival,
)
from .config import load_config
from .evt_analysis import frechet_main_term, gap, lemma3_bound, max_cdf_exact_pareto
from .harness import ExperimentConfig, oracle_curve, preset, regret_curves, run_episode
from .policies import ExtremeHunter, ExtremeHunterConfig, PolicySpec, ThresholdAscent, UCB1
from .tail_estimation import TailEstimate, WidthParams, estimate_c, estimate_h, width_b1, width_b2
from .traces import TraceDataset, ingest_trace

__version__ = "0.1.0"
