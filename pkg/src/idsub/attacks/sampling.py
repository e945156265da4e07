"""Random-replacement attacks: WIR-Random and Metropolis-Hastings (MHM)."""

from ..code.rename import SubstitutionMap
from .common import run_attack


def _wir(search, trajectory):
    smap = SubstitutionMap()
    score = search.baseline
    for name, _ in search.importance():
        cands = [c for c in search.candidates(name) if search.valid(smap, name, c)]
        if not cands:
            continue
        cand = search.rng.choice(cands)
        trial = smap.with_pair(name, cand)
        new_score, correct, _ = search.evaluate(trial)
        if new_score < score:
            smap, score = trial, new_score
            trajectory.append({"name": name, "candidate": cand, "score": new_score})
            if not correct:
                break
    return smap


def attack_wir(snippet, victim, truth, provider, config, other=None):
    """Word-importance order; one random candidate per identifier, kept only if the score drops."""
    return run_attack(_wir, "wir", snippet, victim, truth, provider, config, other)


def acceptance(phi_old, phi_new, eps):
    return min(1.0, (phi_new + eps) / (phi_old + eps))


def _mhm(search, trajectory):
    cfg = search.config
    names = search.snippet.identifiers.names()
    smap = SubstitutionMap()
    phi = 1.0 - search.baseline
    if not names:
        return smap
    max_iter = cfg.max_iterations or cfg.budget * 4
    for step in range(max_iter):
        name = search.rng.choice(names)
        current = smap.get(name, name)
        cands = [c for c in search.candidates(name) if c != current and search.valid(smap, name, c)]
        if not cands:
            continue
        picks = search.rng.sample(cands, min(cfg.proposals, len(cands)))
        best = None
        for cand in picks:
            trial = smap.with_pair(name, cand)
            score, correct, _ = search.evaluate(trial)
            if best is None or 1.0 - score > best[0]:
                best = (1.0 - score, trial, cand, correct)
        phi_new, trial, cand, correct = best
        if not correct:
            trajectory.append({"step": step, "name": name, "candidate": cand, "fitness": phi_new, "alpha": 1.0})
            return trial
        alpha = acceptance(phi, phi_new, cfg.epsilon)
        if search.rng.random() < alpha:
            smap, phi = trial, phi_new
            trajectory.append({"step": step, "name": name, "candidate": cand, "fitness": phi, "alpha": alpha})
    return smap


def attack_mhm(snippet, victim, truth, provider, config, other=None):
    """Metropolis-Hastings over rename states with fitness 1 - truth score."""
    return run_attack(_mhm, "mhm", snippet, victim, truth, provider, config, other)
