"""Exact membership testing in spans of sparse rational vectors.

Vectors are dicts mapping hashable basis keys to Fraction.  Keys only need a
deterministic sort key (``key_fn``) so pivoting is reproducible.  No floats
anywhere; a failed membership is a definite certificate, not a tolerance.
"""

from __future__ import annotations

from fractions import Fraction

_ZERO = Fraction(0)


def _axpy(target: dict, source: dict, factor: Fraction):
    if factor == 0:
        return
    for k, v in source.items():
        nv = target.get(k, _ZERO) + factor * v
        if nv:
            target[k] = nv
        elif k in target:
            del target[k]


class Echelon:
    """Incremental row echelon basis with combination tracking."""

    def __init__(self, key_fn=None):
        self.key_fn = key_fn or (lambda k: k)
        self.rows = {}  # pivot key -> (row dict, combo dict)

    def _pivot(self, row: dict):
        return min(row, key=self.key_fn)

    def reduce(self, vector: dict, combo: dict | None = None):
        """Reduce ``vector`` against the basis; mutates and returns it."""
        if combo is None:
            combo = {}
        while vector:
            p = self._pivot(vector)
            hit = self.rows.get(p)
            if hit is None:
                return vector, combo
            row, row_combo = hit
            factor = -vector[p] / row[p]
            _axpy(vector, row, factor)
            _axpy(combo, row_combo, factor)
        return vector, combo

    def insert(self, vector: dict, tag) -> bool:
        """Add a generator; returns False if dependent on earlier rows."""
        vec, combo = self.reduce(dict(vector), {tag: Fraction(1)})
        if not vec:
            return False
        self.rows[self._pivot(vec)] = (vec, combo)
        return True

    def contains(self, vector: dict) -> bool:
        vec, _ = self.reduce(dict(vector))
        return not vec

    def rank(self) -> int:
        return len(self.rows)


def solve_linear_membership(target: dict, generators, key_fn=None):
    """Exact rational coefficients with sum_i c_i g_i = target, or None.

    ``generators`` is a sequence of sparse dicts.  Returns a list of
    Fractions aligned with ``generators`` when the target is in their span.
    """
    ech = Echelon(key_fn=key_fn)
    for i, gen in enumerate(generators):
        ech.insert(gen, i)
    residual, combo = ech.reduce(dict(target))
    if residual:
        return None
    return [-combo.get(i, _ZERO) for i in range(len(generators))]
