"""Campaign reports: one data shape, four renderings.

``build_report`` distills a campaign into plain data (no paths, no
timestamps), so two runs with the same seed render byte-identical JSON.
The renderings are JSON, an aligned text table, the coverage series as
CSV, and a pair of PNG figures (coverage curve, failure histogram) written
next to the CSV.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .driversched import STATE_RETIRED_BUG
from .failures import CATEGORY_ORDER, UNKNOWN
from .groupsched import EXHAUSTED, HAS_DRIVER


@dataclass(frozen=True)
class CampaignReport:
    library: str
    mode: str
    seed: int
    rounds_completed: int
    groups_enumerated: int
    groups_with_driver: int
    groups_exhausted: int
    drivers_accepted: int
    drivers_retired_bug: int
    queries: int
    query_cost: float
    stillborn_rate: float
    early_crashes: int
    failures: dict[str, int]
    covered_regions: int
    total_regions: int | None
    coverage_fraction: float
    coverage_series: list[int] = field(default_factory=list)
    per_driver: list[dict] = field(default_factory=list)
    per_group: list[dict] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=1)


def build_report(campaign) -> CampaignReport:
    counters = campaign.counters
    queries = counters["queries"]
    accepted = counters["accepted"]
    sr = 1.0 - accepted / queries if queries else 0.0
    per_driver = [
        {
            "id": rec.driver.id,
            "group": list(rec.driver.group.sorted_members()),
            "state": rec.state,
            "energy": rec.energy,
            "exec_seconds": rec.exec_seconds,
            "regions": len(rec.coverage),
        }
        for rec in campaign.pool
    ]
    per_group = [
        {
            "members": list(rec.group.sorted_members()),
            "status": rec.status,
            "observed_coverage": rec.observed_coverage,
            "attempts": rec.attempts,
        }
        for rec in campaign.group_sched.records
        if rec.status != "candidate" or rec.attempts
    ]
    statuses = [rec.status for rec in campaign.group_sched.records]
    return CampaignReport(
        library=campaign.spec.library_name,
        mode=campaign.config.mode,
        seed=campaign.config.seed,
        rounds_completed=campaign.rounds_completed,
        groups_enumerated=campaign.group_sched.pulled,
        groups_with_driver=statuses.count(HAS_DRIVER),
        groups_exhausted=statuses.count(EXHAUSTED),
        drivers_accepted=accepted,
        drivers_retired_bug=sum(
            1 for rec in campaign.pool if rec.state == STATE_RETIRED_BUG
        ),
        queries=queries,
        query_cost=campaign.client.accumulated_cost,
        stillborn_rate=sr,
        early_crashes=counters["early_crashes"],
        failures=dict(counters["failures"]),
        covered_regions=len(campaign.global_coverage.regions),
        total_regions=campaign.global_coverage.total_regions,
        coverage_fraction=campaign.global_coverage.fraction(),
        coverage_series=list(campaign.coverage_series),
        per_driver=per_driver,
        per_group=per_group,
    )


def report_from_state(state_path: str | Path) -> CampaignReport:
    """Rebuild the report for a persisted campaign without running it."""
    from .campaign import Campaign

    return build_report(Campaign.resume(state_path))


def render_table(report: CampaignReport) -> str:
    rows = [
        ("library", report.library),
        ("mode", report.mode),
        ("seed", report.seed),
        ("rounds completed", report.rounds_completed),
        ("groups enumerated", report.groups_enumerated),
        ("groups with driver", report.groups_with_driver),
        ("groups exhausted", report.groups_exhausted),
        ("drivers accepted", report.drivers_accepted),
        ("drivers retired (bug)", report.drivers_retired_bug),
        ("queries", report.queries),
        ("query cost", f"{report.query_cost:.2f}"),
        ("stillborn rate", f"{report.stillborn_rate:.4f}"),
        ("early crashes", report.early_crashes),
        ("covered regions", report.covered_regions),
        ("total regions", report.total_regions if report.total_regions is not None else "?"),
        ("coverage fraction", f"{report.coverage_fraction:.4f}"),
    ]
    for tag in (*CATEGORY_ORDER, UNKNOWN):
        rows.append((f"failures {tag}", report.failures.get(tag, 0)))
    width = max(len(label) for label, _ in rows)
    return "\n".join(f"{label.ljust(width)}  {value}" for label, value in rows)


def coverage_csv(report: CampaignReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["slice_index", "cumulative_regions"])
    for index, cumulative in enumerate(report.coverage_series):
        writer.writerow([index, cumulative])
    return out.getvalue()


def write_report_files(report: CampaignReport, csv_path: str | Path) -> list[Path]:
    """Write the coverage CSV plus the two figures next to it."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(coverage_csv(report))
    written = [csv_path]

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(range(len(report.coverage_series)), report.coverage_series, lw=1.5)
    ax.set_xlabel("slice index")
    ax.set_ylabel("cumulative covered regions")
    title = f"{report.library}: coverage over time (seed {report.seed})"
    ax.set_title(title)
    if report.total_regions:
        ax.axhline(report.total_regions, ls="--", lw=0.8, color="gray")
    fig.tight_layout()
    coverage_png = csv_path.with_name(csv_path.stem + "_coverage.png")
    fig.savefig(coverage_png, dpi=120)
    plt.close(fig)
    written.append(coverage_png)

    fig, ax = plt.subplots(figsize=(7, 4))
    tags = [*CATEGORY_ORDER, UNKNOWN]
    counts = [report.failures.get(tag, 0) for tag in tags]
    labels = [tag.split("_", 1)[0] for tag in tags]
    ax.bar(labels, counts)
    ax.set_xlabel("failure category")
    ax.set_ylabel("count")
    ax.set_title(f"{report.library}: generation failure histogram")
    fig.tight_layout()
    failures_png = csv_path.with_name(csv_path.stem + "_failures.png")
    fig.savefig(failures_png, dpi=120)
    plt.close(fig)
    written.append(failures_png)
    return written
