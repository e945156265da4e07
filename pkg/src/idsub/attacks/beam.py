"""Beam-Attack-style search over partial rename maps."""

from ..code.rename import SubstitutionMap
from .common import run_attack


def statement_order(search, ranked):
    """Group identifiers by declaration kind; groups ranked by their best member."""
    kinds = {e.name: e.kind for e in search.snippet.identifiers}
    groups = {}
    for pos, (name, imp) in enumerate(ranked):
        g = groups.setdefault(kinds[name], {"best": imp, "first": pos, "names": []})
        g["names"].append(name)
    ordered = sorted(groups.values(), key=lambda g: (-g["best"], g["first"]))
    return [n for g in ordered for n in g["names"]]


def _beam(search, trajectory):
    cfg = search.config
    ranked = search.importance()
    order = statement_order(search, ranked) if cfg.group_by_statement else [n for n, _ in ranked]
    beam = [(1.0 - search.baseline, SubstitutionMap())]
    for name in order:
        expanded = []
        seen = set()
        for fit, smap in beam:
            options = [(fit, smap)]
            for cand in search.candidates(name):
                if search.valid(smap, name, cand):
                    options.append((None, smap.with_pair(name, cand)))
            for fit_opt, opt in options:
                key = frozenset(opt.items())
                if key in seen:
                    continue
                seen.add(key)
                score, correct, _ = search.evaluate(opt)
                expanded.append((1.0 - score, len(expanded), opt, correct))
        flips = [e for e in expanded if not e[3]]
        if flips:
            best = min(flips, key=lambda e: (-e[0], e[1]))
            trajectory.append({"name": name, "map": best[2].to_dict(), "fitness": best[0], "flipped": True})
            return best[2]
        expanded.sort(key=lambda e: (-e[0], e[1]))
        beam = [(e[0], e[2]) for e in expanded[: cfg.beam_width]]
        trajectory.append({"name": name, "map": beam[0][1].to_dict(), "fitness": beam[0][0]})
    return beam[0][1]


def attack_beam(snippet, victim, truth, provider, config, other=None):
    """Identifiers in (grouped) importance order; keep the ``beam_width`` fittest partial maps."""
    return run_attack(_beam, "beam", snippet, victim, truth, provider, config, other)
