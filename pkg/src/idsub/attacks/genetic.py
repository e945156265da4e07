"""ALERT-style attack: greedy substitution followed by a genetic search."""

from ..code.rename import SubstitutionMap
from .common import run_attack


def greedy_stage(search, order, trajectory):
    """Commit, per identifier, the candidate with the largest strict score drop.

    Returns (map, flipped).
    """
    smap = SubstitutionMap()
    score = search.baseline
    for name in order:
        best = None
        for cand in search.candidates(name):
            if not search.valid(smap, name, cand):
                continue
            trial = smap.with_pair(name, cand)
            s, correct, _ = search.evaluate(trial)
            if s < score and (best is None or s < best[0]):
                best = (s, trial, cand, correct)
        if best is not None:
            score, smap = best[0], best[1]
            trajectory.append({"stage": "greedy", "name": name, "candidate": best[2], "score": score})
            if not best[3]:
                return smap, True
    return smap, False


def _to_map(genes, chrom):
    return SubstitutionMap({g: c for g, c in zip(genes, chrom) if c is not None})


def _repair(chrom):
    seen = set()
    out = []
    for c in chrom:
        if c is not None and c in seen:
            c = None
        if c is not None:
            seen.add(c)
        out.append(c)
    return tuple(out)


def _mutate(search, genes, chrom):
    rng = search.rng
    i = rng.randrange(len(genes))
    options = [c for c in search.candidates(genes[i]) if c != chrom[i]]
    if not options:
        return chrom
    chrom = list(chrom)
    chrom[i] = rng.choice(options)
    return _repair(chrom)


def genetic_stage(search, genes, seed_map, trajectory):
    cfg = search.config
    rng = search.rng
    if cfg.generations <= 0 or not genes:
        return seed_map
    start = _repair(tuple(seed_map.get(g) for g in genes))

    def fitness(chrom):
        s, correct, _ = search.evaluate(_to_map(genes, chrom))
        return 1.0 - s, correct

    population = [start]
    while len(population) < cfg.population:
        population.append(_mutate(search, genes, start))
    scored = []
    for chrom in population:
        fit, correct = fitness(chrom)
        if not correct:
            trajectory.append({"stage": "genetic", "generation": 0, "map": _to_map(genes, chrom).to_dict()})
            return _to_map(genes, chrom)
        scored.append((fit, chrom))

    for gen in range(1, cfg.generations + 1):
        children = []
        for _ in range(cfg.population):
            a = max(rng.sample(scored, 2), key=lambda fc: fc[0])[1]
            b = max(rng.sample(scored, 2), key=lambda fc: fc[0])[1]
            child = _repair(tuple(x if rng.random() < 0.5 else y for x, y in zip(a, b)))
            if rng.random() < cfg.mutation_rate:
                child = _mutate(search, genes, child)
            fit, correct = fitness(child)
            if not correct:
                trajectory.append({"stage": "genetic", "generation": gen, "map": _to_map(genes, child).to_dict()})
                return _to_map(genes, child)
            children.append((fit, child))
        pool = scored + children
        pool.sort(key=lambda fc: -fc[0])
        uniq, seen = [], set()
        for fc in pool:
            if fc[1] not in seen:
                seen.add(fc[1])
                uniq.append(fc)
        scored = uniq[: cfg.population]
        while len(scored) < 2:
            scored.append(scored[0])
    return _to_map(genes, scored[0][1])


def _greedy_genetic(search, trajectory):
    order = [name for name, _ in search.importance()]
    smap, flipped = greedy_stage(search, order, trajectory)
    if flipped:
        return smap
    return genetic_stage(search, order, smap, trajectory)


def attack_greedy_genetic(snippet, victim, truth, provider, config, other=None):
    return run_attack(_greedy_genetic, "greedy", snippet, victim, truth, provider, config, other)


def attack_greedy(snippet, victim, truth, provider, config, other=None):
    """Greedy stage only (no genetic refinement)."""
    def body(search, trajectory):
        order = [name for name, _ in search.importance()]
        return greedy_stage(search, order, trajectory)[0]
    return run_attack(body, "greedy", snippet, victim, truth, provider, config, other)
