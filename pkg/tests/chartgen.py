"""Seeded random generation of admissible flow charts for property tests.

Charts are drawn by rejection: random vertex-labeled trees get random basic
inputs at their free slots, and only admissible results are kept.  Labels
default to the mu-free alphabet so every output is total and evaluation
comparisons need no fuel-exhaustion caveats.
"""

import random

from hopf_flow.recfun import (AdmissibilityFailure, admissible_check,
                              attach_sigma, sigma_candidates, sigma_positions)
from hopf_flow.trees import mk_tree

# vertex-mode slot counts; children beyond these are never admissible
_SLOT_CAP = {"b": 2, "c": 2, "r": 2, "m": 1}


def random_vertex_tree(rng: random.Random, depth: int, labels):
    label = rng.choice(labels)
    if depth <= 1:
        return mk_tree(label, ())
    width = rng.randint(0, _SLOT_CAP[label])
    return mk_tree(label, tuple(random_vertex_tree(rng, depth - 1, labels)
                                for _ in range(width)))


def random_admissible_charts(count: int, seed: int, depth: int = 3,
                             labels=("b", "c", "r"), max_tries: int = 100000):
    """Distinct admissible flagged charts with their output expressions."""
    rng = random.Random(seed)
    out, seen, tries = [], set(), 0
    while len(out) < count and tries < max_tries:
        tries += 1
        tree = random_vertex_tree(rng, depth, labels)
        sigma = [rng.choice(sigma_candidates(arity))
                 for arity in sigma_positions(tree)]
        chart = attach_sigma(tree, sigma)
        if chart in seen:
            continue
        expr = admissible_check(chart)
        if isinstance(expr, AdmissibilityFailure):
            continue
        seen.add(chart)
        out.append((chart, expr))
    if len(out) < count:
        raise RuntimeError("only %d admissible charts in %d tries"
                           % (len(out), tries))
    return out


def random_args(rng: random.Random, arity: int, hi: int = 4):
    return tuple(rng.randint(1, hi) for _ in range(arity))
