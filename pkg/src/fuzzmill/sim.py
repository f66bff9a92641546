"""Deterministic simulation of a fuzzing target and a text client.

The simulator exists so scheduler behavior can be studied at desk scale:
hundreds of campaign rounds in seconds, bit-reproducible under a seed, no
compiler or fuzzer or network anywhere. It models the things the
schedulers actually react to and nothing else:

- every API owns a block of coverage regions, of heterogeneous size, plus
  a shared warm-up core every driver touches;
- a driver can reach the blocks of the APIs it calls (scaled by a
  per-driver mastery factor) and discovers remaining regions at a
  per-driver geometric rate, so coverage saturates;
- drivers for groups that violate the library's implicit constraints
  usually crash immediately, which is exactly the failure the early-crash
  filter exists to catch (the ground truth always comes from the library
  spec, so disabling constraint checking upstream changes outcomes but
  never the world);
- the synthetic client writes toy call scripts and botches them at a rate
  that grows with group size.

All randomness is derived by hashing (campaign seed, driver id, tick), so
outcomes are independent of call order and survive save/resume.
"""

from __future__ import annotations

import hashlib
import random
import re
from dataclasses import dataclass

from .constraints import sat_implicit
from .executor import ExecutionAdapter, SliceReport
from .factory import DriverSource
from .model import (
    ApiFunction,
    ApiGroup,
    ImplicitConstraint,
    LibrarySpec,
    Parameter,
    normalize_type,
)
from .textgen import TextGenClient


def stable_seed(*parts: object) -> int:
    """Process-independent integer seed from the given parts."""
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class SimConfig:
    block_size_min: int = 8
    block_size_max: int = 40
    core_regions: int = 20
    # Wide quality spread: a weak driver masters little of its APIs and
    # saturates within a few slices, so slices spent on it are wasted.
    # Scheduler comparisons are only informative when such drivers exist.
    discovery_rate_min: float = 0.05
    discovery_rate_max: float = 0.5
    mastery_min: float = 0.15
    mastery_max: float = 1.0
    early_crash_prob_irrational: float = 0.9
    early_crash_prob_rational: float = 0.03
    late_crash_prob: float = 0.02
    client_fail_per_member: float = 0.06
    client_fail_cap: float = 0.6


@dataclass(frozen=True)
class SimTargetModel:
    """Everything the world knows about one driver, fixed at birth."""

    reachable_regions: frozenset[str]
    discovery_rate: float
    crash_tick: int | None


class SimWorld:
    """Region universe for one library spec under one campaign seed."""

    def __init__(self, spec: LibrarySpec, seed: int, config: SimConfig | None = None) -> None:
        self.spec = spec
        self.seed = seed
        self.config = config or SimConfig()
        rng = random.Random(stable_seed(seed, "world"))
        self.api_blocks: dict[str, frozenset[str]] = {}
        offset = 0
        for name in sorted(spec.api_names):
            size = rng.randint(self.config.block_size_min, self.config.block_size_max)
            self.api_blocks[name] = frozenset(
                f"r{offset + j}" for j in range(size)
            )
            offset += size
        self.core = frozenset(f"r{offset + j}" for j in range(self.config.core_regions))
        self.total_regions = offset + self.config.core_regions

    def group_is_rational(self, group: ApiGroup) -> bool:
        return sat_implicit(group, self.spec.implicit)

    def model_for(self, driver: DriverSource) -> SimTargetModel:
        cfg = self.config
        rng = random.Random(stable_seed(self.seed, driver.id, "model"))
        reachable: set[str] = set(self.core)
        for name in driver.group.sorted_members():
            block = sorted(self.api_blocks.get(name, frozenset()))
            mastery = rng.uniform(cfg.mastery_min, cfg.mastery_max)
            keep = max(1, round(mastery * len(block))) if block else 0
            reachable.update(block[:keep])
        rate = rng.uniform(cfg.discovery_rate_min, cfg.discovery_rate_max)
        if self.group_is_rational(driver.group):
            early_p = cfg.early_crash_prob_rational
        else:
            early_p = cfg.early_crash_prob_irrational
        crash_tick: int | None
        if rng.random() < early_p:
            crash_tick = 0
        elif rng.random() < cfg.late_crash_prob:
            crash_tick = 1 + rng.randint(0, 30)
        else:
            crash_tick = None
        return SimTargetModel(
            reachable_regions=frozenset(reachable),
            discovery_rate=rate,
            crash_tick=crash_tick,
        )


class SimAdapter(ExecutionAdapter):
    """Executes drivers against a :class:`SimWorld`, one tick per slice.

    Tick 0 is reserved for the probationary run the factory performs at
    acceptance time; pool slices are ticks 1, 2, ... derived from the
    record's accumulated execution time, so resumed campaigns continue
    the same stream.
    """

    def __init__(self, world: SimWorld, slice_seconds: float = 1.0) -> None:
        self._world = world
        self._slice_seconds = slice_seconds

    @property
    def total_regions(self) -> int:
        return self._world.total_regions

    @property
    def world(self) -> SimWorld:
        return self._world

    def early_crash_check(self, driver: DriverSource, binary) -> bool:
        return self._world.model_for(driver).crash_tick == 0

    def run(self, record, duration_seconds: float | None = None) -> SliceReport:
        duration = duration_seconds or self._slice_seconds
        driver = record.driver
        model = self._world.model_for(driver)
        tick = int(round(record.exec_seconds / duration)) + 1
        if model.crash_tick is not None and tick >= model.crash_tick:
            return SliceReport(
                driver_id=driver.id,
                new_regions=frozenset(),
                exec_seconds=duration,
                crashed=True,
                crash_info=f"simulated crash at tick {tick}",
            )
        remaining = model.reachable_regions - record.coverage.regions
        rng = random.Random(stable_seed(self._world.seed, driver.id, "tick", tick))
        found = frozenset(
            region for region in sorted(remaining) if rng.random() < model.discovery_rate
        )
        return SliceReport(
            driver_id=driver.id,
            new_regions=found,
            exec_seconds=duration,
            crashed=False,
        )


_GROUP_LINE = re.compile(r"^API group: (.+)$", re.MULTILINE)
_REQUIRED_LINE = re.compile(r"call every one of these APIs: (.+)$", re.MULTILINE)
_CALL_LINE = re.compile(r"^call ([A-Za-z_][A-Za-z0-9_]*)", re.MULTILINE)

_BOGUS_CALL = "__no_such_api__"


class SimClient(TextGenClient):
    """Writes toy call scripts for the group named in the prompt.

    Output quality is imperfect on purpose: with a probability that grows
    with group size the script drops one required call, references an
    undefined function, or contains a malformed line. The mistakes are
    drawn from the supplied RNG, which the campaign owns and persists.
    """

    def __init__(
        self,
        rng: random.Random,
        config: SimConfig | None = None,
        cost_per_query: float = 0.02,
    ) -> None:
        super().__init__(cost_per_query)
        self._rng = rng
        self._config = config or SimConfig()

    def _group_from_prompt(self, prompt: str) -> list[str]:
        match = _REQUIRED_LINE.search(prompt)
        if match is None:
            match = _GROUP_LINE.search(prompt)
        if match is not None:
            return [name.strip() for name in match.group(1).split(",") if name.strip()]
        names = [n for n in _CALL_LINE.findall(prompt) if n != _BOGUS_CALL]
        ordered: list[str] = []
        for name in names:
            if name not in ordered:
                ordered.append(name)
        return ordered

    def _complete(self, prompt: str, temperature: float) -> str:
        members = self._group_from_prompt(prompt)
        if not members:
            return "# no APIs found in prompt\n"
        lines = [f"call {name} $input" for name in members]
        cfg = self._config
        p_fail = min(cfg.client_fail_per_member * len(members), cfg.client_fail_cap)
        roll = self._rng.random()
        if roll < p_fail:
            mode = self._rng.randrange(3)
            if mode == 0 and len(lines) > 1:
                del lines[self._rng.randrange(len(lines))]
            elif mode == 1:
                lines.append(f"call {_BOGUS_CALL} $input")
            else:
                lines.append("oops this is not a directive")
        return "\n".join(lines) + "\n"


def synth_spec(
    n_apis: int,
    seed: int,
    n_imply: int | None = None,
    n_conflict: int | None = None,
    library_name: str = "simlib",
) -> LibrarySpec:
    """Synthetic library with a connected type graph and usage constraints.

    APIs form chains through shared handle types, so almost every function
    has explicit-constraint neighbors; imply pairs mimic open/close
    pairings and conflict pairs mark mutually exclusive modes.
    """
    rng = random.Random(stable_seed(seed, "spec", n_apis))
    n_types = max(2, n_apis // 2)
    types = [f"handle_{t} *" for t in range(n_types)]
    apis = []
    for i in range(n_apis):
        name = f"api_{i:03d}"
        ret = types[i % n_types] if rng.random() < 0.8 else "int"
        params = [Parameter(name="h", type=normalize_type(types[(i + 1) % n_types]))]
        if rng.random() < 0.5:
            params.append(Parameter(name="n", type=normalize_type("int")))
        rendered = ", ".join(f"{p.type.spelling()} {p.name}" for p in params)
        apis.append(
            ApiFunction(
                name=name,
                signature=f"{ret} {name}({rendered})",
                return_type=normalize_type(ret),
                parameters=tuple(params),
            )
        )
    names = [a.name for a in apis]
    if n_imply is None:
        n_imply = max(1, n_apis // 8)
    if n_conflict is None:
        n_conflict = max(1, n_apis // 8)
    implicit: list[ImplicitConstraint] = []
    seen_pairs: set[tuple[str, str, str]] = set()
    while len(implicit) < n_imply + n_conflict and len(seen_pairs) < n_apis * 4:
        kind = "imply" if len(implicit) < n_imply else "conflict"
        first, second = rng.sample(names, 2)
        key = (kind, first, second)
        if key in seen_pairs:
            continue
        seen_pairs.add(key)
        implicit.append(ImplicitConstraint(kind=kind, first=first, second=second))
    return LibrarySpec(
        library_name=library_name,
        apis=tuple(apis),
        implicit=tuple(implicit),
        source_root=None,
    )
