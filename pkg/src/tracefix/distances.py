"""Costs of candidate repairs.

Syntactic distance is the sum of absolute differences between a hole
assignment and the original one.  Semantic distance is a per-step Hamming
distance between configuration prefixes: one unit for a differing location
plus one per tracked variable whose values differ (the undefined value
counts as a value, arrays compare whole), plus the prefix length
difference.  The two are aggregated by summing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .lang.ast import RESULT_VAR
from .tracer import (Configuration, Manipulation, Trace, WILDCARD,
                     satisfying_indices, values_equal)


class DomainMismatch(Exception):
    pass


class Unsatisfied(Exception):
    """The candidate trace never reaches the edited location with the
    required values."""


@dataclass(frozen=True)
class Cost:
    syntactic: int
    semantic: int

    @property
    def total(self) -> int:
        return self.syntactic + self.semantic

    def to_json(self) -> dict:
        return {"syntactic": self.syntactic, "semantic": self.semantic,
                "cost": self.total}


def syntactic_distance(assignment: dict[int, int], original: dict[int, int]) -> int:
    if assignment.keys() != original.keys():
        raise DomainMismatch("assignments range over different holes")
    return sum(abs(assignment[h] - original[h]) for h in assignment)


def config_distance(a: Configuration, b: Configuration,
                    vars: Iterable[str]) -> int:
    d = 1 if a.loc != b.loc else 0
    for w in vars:
        if not values_equal(a.valuation.get(w), b.valuation.get(w)):
            d += 1
    return d


def trace_distance(a: Trace | list[Configuration], b: Trace | list[Configuration],
                   vars: Iterable[str]) -> int:
    ca = a.configs if isinstance(a, Trace) else a
    cb = b.configs if isinstance(b, Trace) else b
    vars = list(vars)
    m = min(len(ca), len(cb))
    d = sum(config_distance(ca[h], cb[h], vars) for h in range(m))
    return d + max(len(ca), len(cb)) - m


def tracked_variables(all_vars: Iterable[str], input_vars: Iterable[str],
                      manipulated: Iterable[str]) -> list[str]:
    """Variables the semantic distance ranges over: locals and the result
    slot, minus inputs (which never appear in the published trace views)
    and minus edited variables (their values are the ones being fixed)."""
    drop = set(input_vars) | set(manipulated)
    return [v for v in all_vars if v not in drop]


def manipulated_variables(manipulation: Manipulation) -> list[str]:
    return [v for v, val in manipulation.values.items() if val is not WILDCARD]


def semantic_distance(original_prefix: list[Configuration] | Trace,
                      manipulation: Manipulation,
                      candidate: Trace,
                      location,
                      tracked: Iterable[str]) -> tuple[int, int]:
    """Minimum prefix distance over all indices where the candidate reaches
    ``location`` satisfying the manipulation; returns (distance, index).

    Raises Unsatisfied when no configuration qualifies.
    """
    prefix = (original_prefix.configs if isinstance(original_prefix, Trace)
              else list(original_prefix))
    tracked = list(tracked)
    indices = satisfying_indices(candidate, location, manipulation.values)
    if not indices:
        raise Unsatisfied()
    k = len(prefix) - 1
    best = None
    best_j = None
    # incremental pairwise sums: distance to prefix [0..j] reuses [0..j-1]
    running = 0
    upto = -1
    for j in indices:
        m = min(k, j)
        while upto < m:
            upto += 1
            running += config_distance(prefix[upto], candidate.configs[upto], tracked)
        d = running + abs(k - j)
        if best is None or d < best:
            best, best_j = d, j
    return best, best_j


def aggregate(syntactic: int, semantic: int) -> int:
    return syntactic + semantic
