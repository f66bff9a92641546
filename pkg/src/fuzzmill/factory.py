"""Driver generation: prompt, query, filter, repair, repeat.

``generate_driver`` owns the acceptance pipeline for one API group. Each
attempt costs one client query, and a hard cap (default four queries: the
initial generation plus three repairs) bounds the spend per group. A
candidate driver must clear three filters in order: every group member is
actually called, the source compiles, and a short probationary run does
not crash immediately. Failures feed the next repair prompt with
classified diagnostics and retrieved definitions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .failures import FailureCategory, classify_failure
from .model import ApiGroup, ImplicitConstraint, LibrarySpec
from .prompts import DEFAULT_HINTS, build_generation_prompt, build_repair_prompt
from .retrieve import mask_comments_and_strings, retrieve_context
from .textgen import TextGenClient, TransportError

MAX_QUERIES = 4

RESULT_ACCEPTED = "accepted"
RESULT_MISSING_API = "rejected_missing_api"
RESULT_COMPILE = "rejected_compile"
RESULT_EARLY_CRASH = "rejected_early_crash"
RESULT_EXHAUSTED = "exhausted_retries"
RESULT_BUDGET = "budget_exhausted"

_CONSTRAINT_LINE = re.compile(
    r"^\s*(imply|conflict)\s*\(\s*([A-Za-z_][A-Za-z0-9_:]*)\s*,\s*([A-Za-z_][A-Za-z0-9_:]*)\s*\)\s*;?\s*$"
)


@dataclass(frozen=True)
class DriverSource:
    """One generated driver: source text for an API group."""

    id: str
    group: ApiGroup
    language: str  # "c", "cpp", or "toy"
    text: str
    generation: int = 0

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("driver text is empty")
        if self.language not in ("c", "cpp", "toy"):
            raise ValueError(f"unknown driver language: {self.language!r}")
        if self.generation < 0:
            raise ValueError("generation index is negative")


@dataclass(frozen=True)
class AttemptRecord:
    """What happened to one candidate: which filter it failed and why."""

    result: str
    diagnostics: str = ""
    category: FailureCategory | None = None


@dataclass(frozen=True)
class GenerationOutcome:
    result: str
    driver: DriverSource | None = None
    binary: Path | None = None
    diagnostics: str = ""
    category: FailureCategory | None = None
    queries_used: int = 0
    attempts: tuple[AttemptRecord, ...] = ()

    def __post_init__(self) -> None:
        if self.result == RESULT_ACCEPTED and self.driver is None:
            raise ValueError("accepted outcome must carry the driver")


def parse_implicit_constraints(
    llm_output: str, spec: LibrarySpec
) -> tuple[list[ImplicitConstraint], list[str]]:
    """Keep well-formed imply/conflict lines naming real, distinct APIs.

    Everything else lands in ``rejected_lines``: prose, malformed calls,
    and constraints naming identifiers that are not library functions.
    """
    constraints: list[ImplicitConstraint] = []
    rejected: list[str] = []
    seen: set[tuple[str, str, str]] = set()
    for raw in llm_output.splitlines():
        if not raw.strip():
            continue
        match = _CONSTRAINT_LINE.match(raw)
        if match is None:
            rejected.append(raw)
            continue
        kind, first, second = match.group(1), match.group(2), match.group(3)
        if first == second or not (spec.has_api(first) and spec.has_api(second)):
            rejected.append(raw)
            continue
        key = (kind, first, second)
        if key in seen:
            continue
        seen.add(key)
        constraints.append(ImplicitConstraint(kind=kind, first=first, second=second))
    return constraints, rejected


_TOY_CALL = re.compile(r"^\s*call\s+([A-Za-z_][A-Za-z0-9_]*)", re.MULTILINE)


def static_api_check(driver: DriverSource, group: ApiGroup) -> bool:
    """True iff every group member appears as a call site in the driver.

    For C-family sources a call site is the name followed by an open
    parenthesis, with comments and string literals ignored; mentions in
    either never count. Toy scripts count ``call NAME`` lines.
    """
    if driver.language == "toy":
        called = set(_TOY_CALL.findall(driver.text))
        return all(name in called for name in group.members)
    masked = mask_comments_and_strings(driver.text)
    for name in group.members:
        pattern = re.compile(r"\b%s\s*\(" % re.escape(name))
        if pattern.search(masked) is None:
            return False
    return True


@dataclass
class FactoryConfig:
    max_retries: int = MAX_QUERIES  # total queries: initial + repairs
    temperature: float = 1.0
    cost_budget: float = 5.0
    diagnostics_char_budget: int = 4_000
    hints: tuple[str, ...] = DEFAULT_HINTS


def generate_driver(
    group: ApiGroup,
    spec: LibrarySpec,
    client: TextGenClient,
    toolchain,
    workdir: Path,
    rng=None,
    config: FactoryConfig | None = None,
    early_crash_check: Callable[[DriverSource, Path], bool] | None = None,
    driver_id_factory: Callable[[int], str] | None = None,
    language: str = "c",
) -> GenerationOutcome:
    """Drive the query/filter/repair loop for one group.

    ``early_crash_check(driver, binary)`` returns True when the driver
    crashes during its probationary run; None skips the filter (for tests
    that only exercise compilation). Every failed filter consumes one of
    the ``max_retries`` total queries.
    """
    cfg = config or FactoryConfig()
    attempts: list[AttemptRecord] = []
    queries = 0
    prompt = build_generation_prompt(spec, group, cfg.hints)
    last_diag = ""
    last_category: FailureCategory | None = None

    for attempt in range(cfg.max_retries):
        if client.accumulated_cost >= cfg.cost_budget:
            return GenerationOutcome(
                result=RESULT_BUDGET,
                diagnostics=last_diag,
                category=last_category,
                queries_used=queries,
                attempts=tuple(attempts),
            )
        try:
            text = client.complete(prompt, cfg.temperature)
        except TransportError:
            # One immediate retry on transport trouble, then give up loudly.
            text = client.complete(prompt, cfg.temperature)
        queries += 1
        name = driver_id_factory(attempt) if driver_id_factory else f"drv-{attempt}"
        driver = DriverSource(
            id=name, group=group, language=language, text=text, generation=attempt
        )

        if not static_api_check(driver, group):
            last_diag = "driver does not call every API in the group"
            last_category = None
            attempts.append(AttemptRecord(result=RESULT_MISSING_API, diagnostics=last_diag))
            prompt = build_repair_prompt(
                driver.text,
                "error: the driver must call every one of these APIs: "
                + ", ".join(group.sorted_members()),
                [],
                cfg.diagnostics_char_budget,
            )
            continue

        compiled = toolchain.compile(driver, workdir / f"attempt-{attempt}")
        if not compiled.ok:
            last_diag = compiled.diagnostics
            last_category = classify_failure(last_diag, cfg.diagnostics_char_budget)
            attempts.append(
                AttemptRecord(
                    result=RESULT_COMPILE, diagnostics=last_diag, category=last_category
                )
            )
            snippets = retrieve_context(last_diag, spec.source_root)
            prompt = build_repair_prompt(
                driver.text, last_diag, snippets, cfg.diagnostics_char_budget
            )
            continue

        if early_crash_check is not None and early_crash_check(driver, compiled.binary):
            last_diag = "driver crashed during the short probationary run"
            last_category = None
            attempts.append(AttemptRecord(result=RESULT_EARLY_CRASH, diagnostics=last_diag))
            prompt = build_repair_prompt(
                driver.text,
                "error: the driver crashed immediately when executed; "
                "check argument validity and call order",
                [],
                cfg.diagnostics_char_budget,
            )
            continue

        return GenerationOutcome(
            result=RESULT_ACCEPTED,
            driver=driver,
            binary=compiled.binary,
            queries_used=queries,
            attempts=tuple(attempts),
        )

    return GenerationOutcome(
        result=RESULT_EXHAUSTED,
        diagnostics=last_diag,
        category=last_category,
        queries_used=queries,
        attempts=tuple(attempts),
    )
