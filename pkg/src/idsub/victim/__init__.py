"""Black-box victim models and truth scoring."""

from .base import (
    CLASSIFICATION,
    GENERATION,
    PAIR_CLASSIFICATION,
    BudgetedVictim,
    Victim,
    VictimOutput,
    VictimTask,
    is_correct,
    truth_score,
)
from .bleu import bleu, bleu4
from .remote import RemoteVictim
from .toy import ConjunctionVictim, LiteralVictim, ToySummarizer, ToyVictim, subtoken_bag, train_toy_victim

__all__ = [
    "CLASSIFICATION",
    "GENERATION",
    "PAIR_CLASSIFICATION",
    "BudgetedVictim",
    "ConjunctionVictim",
    "LiteralVictim",
    "RemoteVictim",
    "ToySummarizer",
    "ToyVictim",
    "Victim",
    "VictimOutput",
    "VictimTask",
    "bleu",
    "bleu4",
    "is_correct",
    "subtoken_bag",
    "train_toy_victim",
    "truth_score",
]
