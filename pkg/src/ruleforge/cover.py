"""Weighted set covering over rules: Chvatal's greedy heuristic with
redundant-rule removal, and an exhaustive exact solver for tiny instances."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

EXACT_MAX_RULES = 20


class InfeasibleCoverError(ValueError):
    """Some sample is covered by no rule."""

    def __init__(self, sample: int):
        super().__init__(f"sample {sample} is not covered by any rule")
        self.sample = sample


@dataclass(eq=False)
class CoverProblem:
    """``m`` samples, rule costs ``c_j`` and rule -> covered sample ids ``I(j)``."""

    m: int
    costs: np.ndarray
    covered: list[np.ndarray]
    _by_sample: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        self.costs = np.asarray(self.costs, dtype=np.float64)
        self.covered = [np.unique(np.asarray(c, dtype=np.int64)) for c in self.covered]
        if self.costs.shape != (len(self.covered),):
            raise ValueError("one cost per rule is required")
        if not np.all(np.isfinite(self.costs)) or np.any(self.costs < 1.0):
            raise ValueError("rule costs must be finite and at least 1")
        hit = np.zeros(self.m, dtype=bool)
        for c in self.covered:
            if c.size and (c[0] < 0 or c[-1] >= self.m):
                raise ValueError("covered sample id out of range")
            hit[c] = True
        if not hit.all():
            raise InfeasibleCoverError(int(np.flatnonzero(~hit)[0]))

    @property
    def n(self) -> int:
        return len(self.covered)

    def rules_of(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR view of ``J(i)``: ``(ptr, rule_ids)`` with rules of sample i at
        ``rule_ids[ptr[i]:ptr[i+1]]`` in ascending order."""
        if self._by_sample is None:
            sizes = np.array([c.size for c in self.covered], dtype=np.int64)
            samples = np.concatenate(self.covered) if self.n else np.empty(0, np.int64)
            rules = np.repeat(np.arange(self.n), sizes)
            order = np.lexsort((rules, samples))
            ptr = np.zeros(self.m + 1, dtype=np.int64)
            np.cumsum(np.bincount(samples, minlength=self.m), out=ptr[1:])
            self._by_sample = (ptr, rules[order])
        return self._by_sample

    def J(self, i: int) -> np.ndarray:
        ptr, idx = self.rules_of()
        return idx[ptr[i]:ptr[i + 1]]

    def incidence(self) -> np.ndarray:
        """Dense 0/1 matrix ``A`` with ``A[i, j] = 1`` iff rule j covers sample i."""
        A = np.zeros((self.m, self.n))
        for j, c in enumerate(self.covered):
            A[c, j] = 1.0
        return A

    def is_feasible(self, selected: Sequence[int]) -> bool:
        hit = np.zeros(self.m, dtype=bool)
        for j in selected:
            hit[self.covered[j]] = True
        return bool(hit.all())

    def cost_of(self, selected: Sequence[int]) -> float:
        total = 0.0
        for j in sorted(selected):
            total += float(self.costs[j])
        return total


@dataclass(frozen=True)
class CoverSolution:
    selected: tuple[int, ...]
    total_cost: float
    # rule ids in the order the greedy pass picked them
    pick_order: tuple[int, ...] = ()


def greedy_cover(problem: CoverProblem, remove_redundancy: bool = True) -> CoverSolution:
    """Chvatal's greedy heuristic.

    While samples remain uncovered, pick the rule minimizing
    ``cost / |newly covered samples|`` (ties to the lower rule id); then
    drop redundant rules with :func:`remove_redundant`.
    """
    ptr, by_sample = problem.rules_of()
    remaining = np.array([c.size for c in problem.covered], dtype=np.int64)
    uncovered = np.ones(problem.m, dtype=bool)
    n_left = problem.m
    picked: list[int] = []
    while n_left > 0:
        with np.errstate(divide="ignore"):
            ratio = np.where(remaining > 0, problem.costs / np.maximum(remaining, 1), np.inf)
        j = int(np.argmin(ratio))
        if not np.isfinite(ratio[j]):
            raise InfeasibleCoverError(int(np.flatnonzero(uncovered)[0]))
        picked.append(j)
        newly = problem.covered[j][uncovered[problem.covered[j]]]
        uncovered[newly] = False
        n_left -= newly.size
        touched = np.concatenate([by_sample[ptr[i]:ptr[i + 1]] for i in newly])
        remaining -= np.bincount(touched, minlength=problem.n)
    sol = CoverSolution(tuple(sorted(picked)), problem.cost_of(picked), tuple(picked))
    if remove_redundancy:
        reduced = remove_redundant(sol.selected, problem)
        sol = CoverSolution(reduced.selected, reduced.total_cost, sol.pick_order)
    return sol


def remove_redundant(selection: Sequence[int], problem: CoverProblem) -> CoverSolution:
    """Drop rules whose removal keeps the selection feasible.

    Rules are examined from the most to the least expensive (equal costs:
    higher rule id first); every removable rule is dropped.
    """
    selected = sorted(set(int(j) for j in selection))
    cov = np.zeros(problem.m, dtype=np.int64)
    for j in selected:
        cov[problem.covered[j]] += 1
    if not cov.all():
        raise InfeasibleCoverError(int(np.flatnonzero(cov == 0)[0]))
    keep = set(selected)
    for j in sorted(selected, key=lambda r: (-problem.costs[r], -r)):
        ids = problem.covered[j]
        if np.all(cov[ids] >= 2):
            cov[ids] -= 1
            keep.discard(j)
    kept = tuple(sorted(keep))
    return CoverSolution(kept, problem.cost_of(kept))


def exact_cover(problem: CoverProblem, max_rules: int = EXACT_MAX_RULES) -> CoverSolution:
    """Minimum-cost cover by enumerating every subset of rules.

    Cost ties (within 1e-12) go to the lexicographically smallest sorted id
    tuple.  Refuses instances with more than ``max_rules`` rules.
    """
    n = problem.n
    if n > max_rules:
        raise ValueError(f"exact_cover enumerates 2^n subsets; n={n} exceeds the bound {max_rules}")
    words = (problem.m + 63) // 64
    rule_bits = np.zeros((n, words), dtype=np.uint64)
    for j, c in enumerate(problem.covered):
        for i in c.tolist():
            rule_bits[j, i // 64] |= np.uint64(1) << np.uint64(i % 64)
    full = np.zeros(words, dtype=np.uint64)
    for i in range(problem.m):
        full[i // 64] |= np.uint64(1) << np.uint64(i % 64)

    size = 1 << n
    bits = np.zeros((size, words), dtype=np.uint64)
    cost = np.zeros(size)
    for j in range(n):
        lo, hi = 1 << j, 1 << (j + 1)
        bits[lo:hi] = bits[:lo] | rule_bits[j]
        cost[lo:hi] = cost[:lo] + problem.costs[j]
    feasible = np.all(bits == full, axis=1)
    if not feasible.any():
        raise InfeasibleCoverError(0)
    best = cost[feasible].min()
    candidates = np.flatnonzero(feasible & (cost <= best + 1e-12))
    ids = min(tuple(j for j in range(n) if (int(mask) >> j) & 1) for mask in candidates)
    return CoverSolution(ids, problem.cost_of(ids))


def harmonic(d: int) -> float:
    return float(sum(1.0 / k for k in range(1, d + 1)))
