"""Measurement protocol: fidelity tiers, budget accounting, episode clock."""

from .fidelity import CostModel, Fidelity, apply_observation_noise
from .ledger import BudgetLedger, LedgerEntry
from .clock import Clock
from .sampling import sample_query_times
from .metrics import l2_error, nrmse

__all__ = [
    "CostModel",
    "Fidelity",
    "apply_observation_noise",
    "BudgetLedger",
    "LedgerEntry",
    "Clock",
    "sample_query_times",
    "l2_error",
    "nrmse",
]
