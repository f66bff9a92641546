"""Driver pool scheduling: saturation scores, roulette wheel, feedback.

Accepted drivers enter the pool fresh and are executed before anything
else; after their first slice they compete by score. The score is the
coverage-per-second quotient weighted by remaining energy, so drivers that
stopped finding new regions drift toward (but never reach) zero selection
probability. A driver that crashes is retired for good: the crash is the
product, and rerunning the driver would only rediscover it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

from .executor import CoverageMap, SliceReport, merge_coverage
from .factory import DriverSource

INITIAL_ENERGY = 10
ENERGY_REFUND = 2

STATE_IDLE = "idle"
STATE_RUNNING = "running"
STATE_RETIRED_BUG = "retired_bug"
STATE_RETIRED_EXHAUSTED = "retired_exhausted"

CLASS_FRESH = "fresh"
CLASS_SCORED = "scored"


@dataclass
class DriverRecord:
    driver: DriverSource
    binary: Path | None = None
    energy: int = INITIAL_ENERGY
    coverage: CoverageMap = field(default_factory=CoverageMap)
    exec_seconds: float = 0.0
    state: str = STATE_IDLE
    crash_artifact: str | None = None
    created_order: int = 0

    @property
    def is_fresh(self) -> bool:
        return self.exec_seconds == 0.0

    @property
    def selectable(self) -> bool:
        return self.state == STATE_IDLE


def driver_score(record: DriverRecord, total_regions: int | None = None) -> tuple[str, float]:
    """(priority class, value): fresh drivers outrank every scored one.

    A fresh driver's coverage/time quotient is infinite, so it gets its
    own class instead of a numeric value. Scored value is
    |coverage| / exec_seconds, weighted by max(energy, 1) / E0 so a
    drained driver stays selectable at a tenth of its raw score.
    """
    if record.is_fresh:
        return (CLASS_FRESH, 0.0)
    weight = max(record.energy, 1) / INITIAL_ENERGY
    return (CLASS_SCORED, len(record.coverage) / record.exec_seconds * weight)


def roulette_select(
    pool: list[DriverRecord], n: int, rng: random.Random
) -> list[str]:
    """Pick up to ``n`` driver ids: fresh first (FIFO), then by score.

    Scored slots are drawn without replacement with probability
    proportional to score value. Retired and running drivers are never
    eligible. Zero-score drivers are still reachable once every positive
    score has been drawn.
    """
    if n < 1:
        raise ValueError("batch size must be at least 1")
    eligible = [r for r in pool if r.selectable]
    fresh = sorted(
        (r for r in eligible if r.is_fresh), key=lambda r: r.created_order
    )
    chosen = [r.driver.id for r in fresh[:n]]
    slots = n - len(chosen)
    if slots <= 0:
        return chosen
    scored = [r for r in eligible if not r.is_fresh]
    weights = {r.driver.id: driver_score(r)[1] for r in scored}
    remaining = list(scored)
    while slots > 0 and remaining:
        total = sum(weights[r.driver.id] for r in remaining)
        if total <= 0.0:
            # Nothing has weight; fall back to uniform draws.
            pick = remaining.pop(rng.randrange(len(remaining)))
        else:
            point = rng.random() * total
            acc = 0.0
            index = len(remaining) - 1
            for i, r in enumerate(remaining):
                acc += weights[r.driver.id]
                if point < acc:
                    index = i
                    break
            pick = remaining.pop(index)
        chosen.append(pick.driver.id)
        slots -= 1
    return chosen


def round_robin_select(
    pool: list[DriverRecord], n: int, cursor: int
) -> tuple[list[str], int]:
    """Ablation selector: cycle through eligible drivers in creation order."""
    eligible = sorted(
        (r for r in pool if r.selectable), key=lambda r: r.created_order
    )
    if not eligible:
        return [], cursor
    chosen = []
    for k in range(min(n, len(eligible))):
        chosen.append(eligible[(cursor + k) % len(eligible)].driver.id)
    return chosen, (cursor + len(chosen)) % len(eligible)


def apply_slice_result(
    record: DriverRecord, report: SliceReport, global_coverage: CoverageMap
) -> CoverageMap:
    """Fold one slice into the record and the campaign-wide coverage.

    Energy drops by one per slice and earns a +2 refund (capped at the
    initial level) when the slice found regions this driver had never hit
    before. Crashes retire the record permanently.
    """
    if report.driver_id != record.driver.id:
        raise ValueError("slice report does not belong to this driver")
    if record.state != STATE_RUNNING:
        raise ValueError("slice feedback for a driver that was not running")
    genuinely_new = report.new_regions - record.coverage.regions
    slice_map = CoverageMap(
        regions=frozenset(report.new_regions),
        total_regions=record.coverage.total_regions,
    )
    record.coverage = merge_coverage(record.coverage, slice_map)
    record.exec_seconds += report.exec_seconds
    energy = record.energy - 1
    if genuinely_new:
        energy += ENERGY_REFUND
    record.energy = min(max(energy, 0), INITIAL_ENERGY)
    if report.crashed:
        record.state = STATE_RETIRED_BUG
        record.crash_artifact = report.crash_info
    else:
        record.state = STATE_IDLE
    return merge_coverage(global_coverage, slice_map)


def stillborn_rate(compilable_count: int, query_count: int) -> float:
    """Share of generation queries that produced no usable driver."""
    if query_count == 0:
        raise ValueError("stillborn rate is undefined with zero queries")
    if not 0 <= compilable_count <= query_count:
        raise ValueError("compilable count must lie within [0, queries]")
    return 1.0 - compilable_count / query_count
