"""Online buy-at-bulk network design: LAST, multi-sink LAST, an online
pair spanner, non-oblivious and oblivious single-sink buy-at-bulk, with
exact oracles for small instances."""
from .cables import CableSchedule, CableType, RoutePlan, cost_under, decompose_concave, g, prune
from .last import OnlineLast, run_last
from .metric import Instance, OnlineMetric, generate
from .mlast import Mlast
from .nets import NetHierarchy
from .nonoblivious import NonObliviousBab, run_bab
from .oblivious import ObliviousBab, run_oblivious
from .spanner import Spanner, run_spanner

__all__ = [
    "CableSchedule", "CableType", "Instance", "Mlast", "NetHierarchy", "NonObliviousBab", "ObliviousBab",
    "OnlineLast", "OnlineMetric", "RoutePlan", "Spanner", "cost_under", "decompose_concave", "g", "generate",
    "prune", "run_bab", "run_last", "run_oblivious", "run_spanner",
]
