"""Multi-objective prioritization of API groups for driver generation.

Candidates are scored on four axes: similarity to previously productive
groups, predicted coverage, (negated) group length, and the entropy gain
their APIs would add to the driver pool. Nondominated sorting ranks the
candidate window into Pareto fronts and batches are filled front by front.
The first batch of a campaign is drawn uniformly at random to bootstrap.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .model import ApiGroup

CANDIDATE = "candidate"
GENERATING = "generating"
HAS_DRIVER = "has_driver"
EXHAUSTED = "exhausted"


@dataclass
class GroupRecord:
    group: ApiGroup
    status: str = CANDIDATE
    observed_coverage: float = 0.0  # best normalized coverage among its drivers
    attempts: int = 0
    executed: bool = False  # at least one slice of one of its drivers ran


@dataclass(frozen=True)
class ObjectiveVector:
    """One candidate's objectives, all oriented so larger is better."""

    similarity: float
    predicted_coverage: float
    neg_length: int
    entropy_gain: float

    def as_tuple(self) -> tuple[float, float, int, float]:
        return (self.similarity, self.predicted_coverage, self.neg_length, self.entropy_gain)


def jaccard(a: set, b: set) -> float:
    """|a ∩ b| / |a ∪ b|, defined as 0 when both sets are empty."""
    if not a and not b:
        return 0.0
    union = len(a | b)
    return len(a & b) / union


def similarity_score(candidate: ApiGroup, history: Sequence[GroupRecord]) -> float:
    """Coverage-weighted Jaccard similarity to previously executed groups."""
    return sum(
        jaccard(set(rec.group.members), set(candidate.members)) * rec.observed_coverage
        for rec in history
    )


def pool_entropy(frequencies: dict[str, int]) -> float:
    """Shannon entropy (bits) of the normalized API frequency distribution.

    Terms accumulate in sorted key order: float addition is not
    associative, and this value feeds tie-breaking comparisons, so the sum
    must not depend on dict insertion history.
    """
    total = sum(frequencies.values())
    if total <= 0:
        return 0.0
    entropy = 0.0
    for name in sorted(frequencies):
        count = frequencies[name]
        if count > 0:
            p = count / total
            entropy -= p * math.log2(p)
    return entropy


def entropy_gain(candidate: ApiGroup, frequencies: dict[str, int]) -> float:
    """Entropy change from adding one occurrence of each candidate member."""
    updated = dict(frequencies)
    for name in candidate.members:
        updated[name] = updated.get(name, 0) + 1
    return pool_entropy(updated) - pool_entropy(frequencies)


def pareto_rank(candidates: Sequence[ObjectiveVector]) -> list[int]:
    """Front index per candidate (0 = nondominated), by iterative peeling.

    ``v`` dominates ``w`` when ``v >= w`` componentwise with at least one
    strict component. Equivalent to rank(x) = 1 + max rank among x's
    dominators.
    """
    n = len(candidates)
    if n == 0:
        return []
    values = np.array([c.as_tuple() for c in candidates], dtype=float)
    ge = (values[:, None, :] >= values[None, :, :]).all(axis=2)
    gt = (values[:, None, :] > values[None, :, :]).any(axis=2)
    dominates = ge & gt  # dominates[i, j]: i dominates j
    dominator_count = dominates.sum(axis=0)
    ranks = np.full(n, -1, dtype=int)
    front = 0
    remaining = np.ones(n, dtype=bool)
    while remaining.any():
        members = remaining & (dominator_count == 0)
        if not members.any():  # pragma: no cover - dominance is acyclic
            members = remaining.copy()
        ranks[members] = front
        remaining &= ~members
        dominator_count = dominator_count - dominates[members].sum(axis=0)
        front += 1
    return ranks.tolist()


@dataclass
class SchedulerConfig:
    batch_size_k: int = 4
    window: int = 2048
    max_group_len: int = 5
    random_groups: bool = False  # ablation: uniform random selection


class GroupScheduler:
    """Owns the candidate window and selection state for the group path.

    Single-writer: only the campaign loop mutates records. The enumerator
    is pulled lazily so giant group spaces are never materialized.
    """

    def __init__(
        self,
        enumerator: Iterator[ApiGroup],
        config: SchedulerConfig,
        rng: random.Random,
    ):
        self.enumerator = enumerator
        self.config = config
        self.rng = rng
        self.records: list[GroupRecord] = []
        self._by_key: dict[tuple[str, ...], GroupRecord] = {}
        self.pool_frequencies: dict[str, int] = {}
        self.exhausted_stream = False
        self.pulled = 0

    @staticmethod
    def key_of(group: ApiGroup) -> tuple[str, ...]:
        return tuple(group.sorted_members())

    def record_for(self, group: ApiGroup) -> GroupRecord:
        return self._by_key[self.key_of(group)]

    def _refill_window(self) -> None:
        candidates = sum(1 for r in self.records if r.status == CANDIDATE)
        while not self.exhausted_stream and candidates < self.config.window:
            try:
                group = next(self.enumerator)
            except StopIteration:
                self.exhausted_stream = True
                break
            self.pulled += 1
            key = self.key_of(group)
            if key in self._by_key:
                continue
            rec = GroupRecord(group=group)
            self.records.append(rec)
            self._by_key[key] = rec
            candidates += 1

    def _history(self) -> list[GroupRecord]:
        return [r for r in self.records if r.executed]

    def _api_coverage_means(self) -> dict[str, float]:
        sums: dict[str, float] = {}
        counts: dict[str, int] = {}
        for rec in self._history():
            for name in rec.group.members:
                sums[name] = sums.get(name, 0.0) + rec.observed_coverage
                counts[name] = counts.get(name, 0) + 1
        return {name: sums[name] / counts[name] for name in sums}

    def objectives_for(
        self, candidate: ApiGroup, history: Sequence[GroupRecord], api_cov: dict[str, float]
    ) -> ObjectiveVector:
        members = candidate.sorted_members()
        predicted = sum(api_cov.get(name, 0.0) for name in members) / len(members)
        return ObjectiveVector(
            similarity=similarity_score(candidate, history),
            predicted_coverage=predicted,
            neg_length=-candidate.size,
            entropy_gain=entropy_gain(candidate, self.pool_frequencies),
        )

    def select_batch(self, k: int | None = None) -> list[ApiGroup]:
        """Pick up to k candidates and mark them generating.

        With no execution history the batch is uniformly random (bootstrap).
        Otherwise candidates are Pareto-ranked on the four objectives and the
        batch fills from rank 0 upward; within a rank, higher entropy gain
        first, member order breaking ties. An empty batch signals candidate
        exhaustion, not an error.
        """
        k = self.config.batch_size_k if k is None else k
        if k < 1:
            raise ValueError("batch size must be >= 1")
        self._refill_window()
        candidates = [r for r in self.records if r.status == CANDIDATE]
        if not candidates:
            return []
        history = self._history()
        if not history or self.config.random_groups:
            chosen = self.rng.sample(candidates, k=min(k, len(candidates)))
        else:
            api_cov = self._api_coverage_means()
            vectors = [self.objectives_for(r.group, history, api_cov) for r in candidates]
            ranks = pareto_rank(vectors)
            ordering = sorted(
                range(len(candidates)),
                key=lambda i: (
                    ranks[i],
                    -vectors[i].entropy_gain,
                    self.key_of(candidates[i].group),
                ),
            )
            chosen = [candidates[i] for i in ordering[:k]]
        for rec in chosen:
            rec.status = GENERATING
        return [rec.group for rec in chosen]

    def note_generation_outcome(self, group: ApiGroup, accepted: bool, queries: int,
                                retryable: bool = False) -> None:
        rec = self.record_for(group)
        rec.attempts += queries
        if accepted:
            rec.status = HAS_DRIVER
            for name in group.members:
                self.pool_frequencies[name] = self.pool_frequencies.get(name, 0) + 1
        elif retryable:
            rec.status = CANDIDATE
        else:
            rec.status = EXHAUSTED

    def note_slice(self, group: ApiGroup, normalized_coverage: float) -> None:
        rec = self.record_for(group)
        rec.executed = True
        rec.observed_coverage = max(rec.observed_coverage, normalized_coverage)
