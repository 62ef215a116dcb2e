"""Exact reachability checking for quantised feedforward ReLU networks."""

from .formats import FixedFormat, FloatFormat, Overflow, Rounding, parse_format
from .network import Network, eval_quantised, eval_rational, make_network, quantise
from .verify import Caps, Verdict, reach_bv, reach_f_bv, reach_f_lp, reach_lp, reach_q_lp

__version__ = "0.1.0"

__all__ = [
    "Caps", "FixedFormat", "FloatFormat", "Network", "Overflow", "Rounding",
    "Verdict", "eval_quantised", "eval_rational", "make_network",
    "parse_format", "quantise", "reach_bv", "reach_f_bv", "reach_f_lp",
    "reach_lp", "reach_q_lp",
]
