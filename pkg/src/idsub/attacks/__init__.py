"""Black-box identifier-substitution attackers."""

from .beam import attack_beam
from .candidates import CandidateProvider, FixedProvider, RandomNameProvider
from .common import METHODS, AttackConfig, AttackResult, OriginalMisclassified, importance_rank
from .genetic import attack_greedy, attack_greedy_genetic
from .sampling import acceptance, attack_mhm, attack_wir

ATTACKS = {
    "wir": attack_wir,
    "mhm": attack_mhm,
    "greedy": attack_greedy_genetic,
    "beam": attack_beam,
}


def attack(snippet, victim, truth, provider, config, other=None):
    return ATTACKS[config.method](snippet, victim, truth, provider, config, other)


__all__ = [
    "ATTACKS",
    "METHODS",
    "AttackConfig",
    "AttackResult",
    "CandidateProvider",
    "FixedProvider",
    "OriginalMisclassified",
    "RandomNameProvider",
    "acceptance",
    "attack",
    "attack_beam",
    "attack_greedy",
    "attack_greedy_genetic",
    "attack_mhm",
    "attack_wir",
    "importance_rank",
]
