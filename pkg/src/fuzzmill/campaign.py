"""The dual-scheduler campaign: configuration, loop, persistence.

A campaign alternates two kinds of rounds. A group round asks the group
scheduler for a batch of API groups and tries to turn each into an
accepted driver through the factory; accepted drivers enter the pool
fresh. A driver round asks the driver scheduler for a batch of pool
drivers, runs each for one time slice, and feeds coverage and crash
results back into both schedulers. The loop runs a fixed number of rounds
(driver rounds are the campaign clock); running out of query money stops
generation but never execution.

State is one JSON document: pools, counters, the coverage series, and the
exact states of all random streams, so a resumed campaign continues the
run that never stopped. In simulated mode the whole campaign is a pure
function of (config, seed).
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import tomli

from .constraints import enumerate_groups
from .driversched import (
    DriverRecord,
    STATE_RUNNING,
    apply_slice_result,
    round_robin_select,
    roulette_select,
)
from .executor import (
    CoverageMap,
    CToolchain,
    DEFAULT_WORKDIR_QUOTA_BYTES,
    FuzzerAdapter,
    run_slice,
)
from .factory import (
    FactoryConfig,
    RESULT_ACCEPTED,
    RESULT_BUDGET,
    RESULT_COMPILE,
    RESULT_EARLY_CRASH,
    generate_driver,
)
from .failures import CATEGORY_ORDER, UNKNOWN, classify_failure
from .groupsched import GroupScheduler, SchedulerConfig
from .model import ApiGroup, load_library_spec
from .sim import SimAdapter, SimClient, SimConfig, SimWorld, stable_seed
from .textgen import HttpChatClient, TransportError

SCHEMA_VERSION = 1

MODE_SIM = "sim"
MODE_REAL = "real"


@dataclass
class CampaignConfig:
    spec_path: str
    mode: str = MODE_SIM
    seed: int = 0
    rounds: int = 200
    group_batch_k: int = 4
    driver_batch_n: int = 4
    slice_seconds: float = 1.0
    query_cost_budget: float = 5.0
    cost_per_query: float = 0.02
    max_retries: int = 4
    wall_clock_seconds: float | None = None
    window: int = 256
    min_group_len: int = 2
    max_group_len: int = 5
    check_implicit: bool = True
    random_groups: bool = False
    round_robin_drivers: bool = False
    loose_pointer_match: bool = False
    language: str | None = None
    workdir: str = "fuzzmill-work"
    state_path: str | None = None
    temperature: float = 1.0
    compile_template: str | None = None
    sanitizers: list[str] = field(default_factory=list)
    run_template: str | None = None
    coverage_template: str | None = None
    quota_bytes: int = DEFAULT_WORKDIR_QUOTA_BYTES
    client_endpoint: str | None = None
    client_model: str | None = None
    client_key_env: str = "FUZZMILL_API_KEY"
    sim: dict = field(default_factory=dict)

    @property
    def effective_language(self) -> str:
        if self.language:
            return self.language
        return "toy" if self.mode == MODE_SIM else "c"

    def validate(self) -> None:
        if self.mode not in (MODE_SIM, MODE_REAL):
            raise ValueError(f"unknown mode: {self.mode!r}")
        positive = {
            "rounds": self.rounds,
            "group_batch_k": self.group_batch_k,
            "driver_batch_n": self.driver_batch_n,
            "slice_seconds": self.slice_seconds,
            "max_retries": self.max_retries,
            "window": self.window,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if self.query_cost_budget < 0:
            raise ValueError("query_cost_budget must be >= 0")
        if not 2 <= self.min_group_len <= self.max_group_len:
            raise ValueError("group length range must satisfy 2 <= min <= max")
        if self.mode == MODE_REAL:
            for name in ("compile_template", "run_template", "coverage_template",
                         "client_endpoint", "client_model"):
                if not getattr(self, name):
                    raise ValueError(f"real mode requires config key {name!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "CampaignConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        if "spec_path" not in data:
            raise ValueError("config is missing spec_path")
        config = cls(**data)
        config.validate()
        return config

    @classmethod
    def from_file(cls, path: str | Path) -> "CampaignConfig":
        path = Path(path)
        if path.suffix == ".toml":
            data = tomli.loads(path.read_text())
        else:
            data = json.loads(path.read_text())
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _rng_state_to_json(rng: random.Random) -> list:
    version, internal, gauss = rng.getstate()
    return [version, list(internal), gauss]


def _rng_state_from_json(data: list) -> tuple:
    return (data[0], tuple(data[1]), data[2])


def _fresh_counters() -> dict:
    counters = {
        "queries": 0,
        "compiled": 0,
        "accepted": 0,
        "early_crashes": 0,
        "budget_exhausted_groups": 0,
        "exhausted_groups": 0,
        "transport_errors": 0,
        "failures": {tag: 0 for tag in (*CATEGORY_ORDER, UNKNOWN)},
    }
    return counters


class Campaign:
    def __init__(self, config: CampaignConfig, state_doc: dict | None = None) -> None:
        config.validate()
        self.config = config
        self.spec = load_library_spec(config.spec_path)
        seed = config.seed
        self.rng_groups = random.Random(stable_seed(seed, "groups"))
        self.rng_drivers = random.Random(stable_seed(seed, "drivers"))
        self.rng_client = random.Random(stable_seed(seed, "client"))
        self._enumerator = enumerate_groups(
            self.spec,
            size_range=(config.min_group_len, config.max_group_len),
            order_seed=stable_seed(seed, "enum"),
            check_explicit=True,
            check_implicit=config.check_implicit,
            loose_pointer_match=config.loose_pointer_match,
        )
        self.group_sched = GroupScheduler(
            self._enumerator,
            SchedulerConfig(
                batch_size_k=config.group_batch_k,
                window=config.window,
                max_group_len=config.max_group_len,
                random_groups=config.random_groups,
            ),
            self.rng_groups,
        )
        self.workdir = Path(config.workdir)
        if config.mode == MODE_SIM:
            sim_config = SimConfig(**config.sim) if config.sim else SimConfig()
            self.world = SimWorld(self.spec, seed, sim_config)
            self.adapter = SimAdapter(self.world, config.slice_seconds)
            from .executor import ToyToolchain

            self.toolchain = ToyToolchain(self.spec.api_names)
            self.client = SimClient(self.rng_client, sim_config, config.cost_per_query)
        else:
            self.world = None
            self.toolchain = CToolchain(config.compile_template, config.sanitizers)
            self.adapter = FuzzerAdapter(
                run_template=config.run_template,
                coverage_template=config.coverage_template,
                workroot=self.workdir / "slices",
                quota_bytes=config.quota_bytes,
            )
            self.client = HttpChatClient(
                endpoint=config.client_endpoint,
                model=config.client_model,
                key_env=config.client_key_env,
                cost_per_query=config.cost_per_query,
            )
        self.pool: list[DriverRecord] = []
        self._pool_by_id: dict[str, DriverRecord] = {}
        self.global_coverage = CoverageMap(
            total_regions=self.adapter.total_regions
        )
        self.counters = _fresh_counters()
        self.coverage_series: list[int] = []
        self.rounds_completed = 0
        self.generation_calls = 0
        self.round_robin_cursor = 0
        if state_doc is not None:
            self._restore(state_doc)

    # ----- state persistence -------------------------------------------------

    def state_document(self) -> dict:
        drivers = []
        for rec in self.pool:
            drivers.append(
                {
                    "id": rec.driver.id,
                    "group": list(rec.driver.group.sorted_members()),
                    "language": rec.driver.language,
                    "text": rec.driver.text,
                    "generation": rec.driver.generation,
                    "binary": str(rec.binary) if rec.binary else None,
                    "energy": rec.energy,
                    "regions": sorted(rec.coverage.regions),
                    "total_regions": rec.coverage.total_regions,
                    "exec_seconds": rec.exec_seconds,
                    "state": rec.state,
                    "crash_artifact": rec.crash_artifact,
                    "created_order": rec.created_order,
                }
            )
        group_records = []
        for rec in self.group_sched.records:
            group_records.append(
                {
                    "members": list(rec.group.sorted_members()),
                    "status": rec.status,
                    "observed_coverage": rec.observed_coverage,
                    "attempts": rec.attempts,
                    "executed": rec.executed,
                }
            )
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config.to_dict(),
            "rounds_completed": self.rounds_completed,
            "generation_calls": self.generation_calls,
            "round_robin_cursor": self.round_robin_cursor,
            "rng": {
                "groups": _rng_state_to_json(self.rng_groups),
                "drivers": _rng_state_to_json(self.rng_drivers),
                "client": _rng_state_to_json(self.rng_client),
            },
            "client_cost": self.client.accumulated_cost,
            "client_queries": self.client.query_count,
            "group_scheduler": {
                "pulled": self.group_sched.pulled,
                "exhausted": self.group_sched.exhausted_stream,
                "pool_frequencies": dict(sorted(self.group_sched.pool_frequencies.items())),
                "records": group_records,
            },
            "drivers": drivers,
            "global_coverage": {
                "regions": sorted(self.global_coverage.regions),
                "total_regions": self.global_coverage.total_regions,
            },
            "counters": self.counters,
            "coverage_series": self.coverage_series,
        }

    def save_state(self, path: str | Path | None = None) -> Path:
        target = Path(path or self.config.state_path or self.workdir / "state.json")
        target.parent.mkdir(parents=True, exist_ok=True)
        doc = json.dumps(self.state_document(), sort_keys=True, indent=1)
        tmp = target.with_suffix(target.suffix + ".tmp")
        tmp.write_text(doc)
        tmp.replace(target)
        return target

    def _restore(self, doc: dict) -> None:
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(
                f"state schema version {doc.get('schema_version')!r} is not supported; "
                f"expected {SCHEMA_VERSION}"
            )
        self.rounds_completed = doc["rounds_completed"]
        self.generation_calls = doc["generation_calls"]
        self.round_robin_cursor = doc["round_robin_cursor"]
        self.rng_groups.setstate(_rng_state_from_json(doc["rng"]["groups"]))
        self.rng_drivers.setstate(_rng_state_from_json(doc["rng"]["drivers"]))
        self.rng_client.setstate(_rng_state_from_json(doc["rng"]["client"]))
        self.client.restore_accounting(doc["client_cost"], doc["client_queries"])

        sched_doc = doc["group_scheduler"]
        for _ in range(sched_doc["pulled"]):
            try:
                next(self._enumerator)
            except StopIteration:
                break
        self.group_sched.pulled = sched_doc["pulled"]
        self.group_sched.exhausted_stream = sched_doc["exhausted"]
        self.group_sched.pool_frequencies = dict(sched_doc["pool_frequencies"])
        from .groupsched import GroupRecord

        for entry in sched_doc["records"]:
            group = ApiGroup.of(*entry["members"])
            rec = GroupRecord(
                group=group,
                status=entry["status"],
                observed_coverage=entry["observed_coverage"],
                attempts=entry["attempts"],
                executed=entry["executed"],
            )
            self.group_sched.records.append(rec)
            self.group_sched._by_key[self.group_sched.key_of(group)] = rec

        from .factory import DriverSource

        for entry in doc["drivers"]:
            driver = DriverSource(
                id=entry["id"],
                group=ApiGroup.of(*entry["group"]),
                language=entry["language"],
                text=entry["text"],
                generation=entry["generation"],
            )
            rec = DriverRecord(
                driver=driver,
                binary=Path(entry["binary"]) if entry["binary"] else None,
                energy=entry["energy"],
                coverage=CoverageMap(
                    regions=frozenset(entry["regions"]),
                    total_regions=entry["total_regions"],
                ),
                exec_seconds=entry["exec_seconds"],
                state=entry["state"],
                crash_artifact=entry["crash_artifact"],
                created_order=entry["created_order"],
            )
            self.pool.append(rec)
            self._pool_by_id[driver.id] = rec
        cov = doc["global_coverage"]
        self.global_coverage = CoverageMap(
            regions=frozenset(cov["regions"]), total_regions=cov["total_regions"]
        )
        self.counters = doc["counters"]
        self.coverage_series = list(doc["coverage_series"])

    @classmethod
    def resume(cls, state_path: str | Path, config_overrides: dict | None = None) -> "Campaign":
        doc = json.loads(Path(state_path).read_text())
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(
                f"state schema version {doc.get('schema_version')!r} is not supported; "
                f"expected {SCHEMA_VERSION}"
            )
        config_data = dict(doc["config"])
        if config_overrides:
            if "seed" in config_overrides and config_overrides["seed"] != config_data["seed"]:
                raise ValueError("the seed is part of the campaign state and cannot change")
            config_data.update(config_overrides)
        config = CampaignConfig.from_dict(config_data)
        return cls(config, state_doc=doc)

    # ----- the two round kinds ----------------------------------------------

    def _early_crash_check(self, driver, binary) -> bool:
        if self.config.mode == MODE_SIM:
            return self.adapter.early_crash_check(driver, binary)
        probe = DriverRecord(driver=driver, binary=binary)
        report = self.adapter.run(probe, 15.0)
        return report.crashed

    def _group_round(self) -> None:
        groups = self.group_sched.select_batch(self.config.group_batch_k)
        for group in groups:
            serial = self.generation_calls
            self.generation_calls += 1
            factory_config = FactoryConfig(
                max_retries=self.config.max_retries,
                temperature=self.config.temperature,
                cost_budget=self.config.query_cost_budget,
            )
            try:
                outcome = generate_driver(
                    group,
                    self.spec,
                    self.client,
                    self.toolchain,
                    workdir=self.workdir / "gen" / f"{serial:05d}",
                    config=factory_config,
                    early_crash_check=self._early_crash_check,
                    driver_id_factory=lambda attempt, s=serial: f"d{s:05d}.{attempt}",
                    language=self.config.effective_language,
                )
            except TransportError:
                self.counters["transport_errors"] += 1
                self.group_sched.note_generation_outcome(group, False, 0, retryable=True)
                continue
            self._absorb_generation(group, outcome)

    def _absorb_generation(self, group: ApiGroup, outcome) -> None:
        self.counters["queries"] += outcome.queries_used
        for attempt in outcome.attempts:
            if attempt.result == RESULT_EARLY_CRASH:
                self.counters["compiled"] += 1
                self.counters["early_crashes"] += 1
            elif attempt.result == RESULT_COMPILE and attempt.category is not None:
                self.counters["failures"][attempt.category.tag] += 1
        if outcome.result == RESULT_ACCEPTED:
            self.counters["compiled"] += 1
            self.counters["accepted"] += 1
            record = DriverRecord(
                driver=outcome.driver,
                binary=outcome.binary,
                coverage=CoverageMap(total_regions=self.adapter.total_regions),
                created_order=len(self.pool),
            )
            self.pool.append(record)
            self._pool_by_id[outcome.driver.id] = record
            self.group_sched.note_generation_outcome(
                group, True, outcome.queries_used
            )
        elif outcome.result == RESULT_BUDGET:
            self.counters["budget_exhausted_groups"] += 1
            self.group_sched.note_generation_outcome(
                group, False, outcome.queries_used, retryable=True
            )
        else:
            self.counters["exhausted_groups"] += 1
            self.group_sched.note_generation_outcome(
                group, False, outcome.queries_used, retryable=False
            )

    def _driver_round(self) -> None:
        n = self.config.driver_batch_n
        if self.config.round_robin_drivers:
            ids, self.round_robin_cursor = round_robin_select(
                self.pool, n, self.round_robin_cursor
            )
        else:
            ids = roulette_select(self.pool, n, self.rng_drivers)
        for driver_id in ids:
            record = self._pool_by_id[driver_id]
            record.state = STATE_RUNNING
            report = run_slice(record, self.config.slice_seconds, self.adapter)
            self.global_coverage = apply_slice_result(
                record, report, self.global_coverage
            )
            if report.failure_info:
                tag = classify_failure(report.failure_info).tag
                self.counters["failures"][tag] += 1
            if report.crashed:
                self._write_crash_artifact(record, report)
            self.group_sched.note_slice(
                record.driver.group, record.coverage.fraction()
            )
        self.coverage_series.append(len(self.global_coverage.regions))
        self.rounds_completed += 1

    def _write_crash_artifact(self, record: DriverRecord, report) -> None:
        artifact_dir = self.workdir / "artifacts" / record.driver.id
        artifact_dir.mkdir(parents=True, exist_ok=True)
        (artifact_dir / "crash.txt").write_text(report.crash_info or "")
        (artifact_dir / "driver.txt").write_text(record.driver.text)
        record.crash_artifact = str(artifact_dir / "crash.txt")

    # ----- the loop -----------------------------------------------------------

    def run(self):
        from .reporting import build_report

        started = time.monotonic()
        budget = self.config.wall_clock_seconds
        while self.rounds_completed < self.config.rounds:
            if budget is not None and time.monotonic() - started > budget:
                break
            self._group_round()
            self._driver_round()
        self.save_state()
        return build_report(self)
