"""Compilation and time-sliced execution of fuzz drivers.

Two pluggable layers live here. A ``Toolchain`` turns driver source text
into something runnable (a real compiler for C/C++, a line checker for the
toy script language), reporting failures as full diagnostic text so the
failure classifier and the context retriever can work on them. An
``ExecutionAdapter`` runs one driver for one time slice and reports newly
covered regions and crashes; the real adapter wraps an external
coverage-guided fuzzer, while the simulator adapter lives in ``sim``.

Region identifiers are opaque strings (``file:index`` in real mode,
``r<k>`` in the simulator), so nothing downstream cares whether they mean
regions or branches.
"""

from __future__ import annotations

import os
import shlex
import subprocess
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Callable, Iterable

from .failures import OUT_OF_SPACE_SIGNAL

if TYPE_CHECKING:
    from .factory import DriverSource

DEFAULT_WORKDIR_QUOTA_BYTES = 256 * 1024 * 1024


class ToolchainError(RuntimeError):
    """The build environment is broken (missing tool, bad template)."""


@dataclass(frozen=True)
class CoverageMap:
    """A set of covered region ids, with an optional known denominator."""

    regions: frozenset[str] = frozenset()
    total_regions: int | None = None

    def __post_init__(self) -> None:
        if self.total_regions is not None and len(self.regions) > self.total_regions:
            raise ValueError("more covered regions than the stated total")

    def __len__(self) -> int:
        return len(self.regions)

    def fraction(self) -> float:
        """Covered share of the instrumented universe, 0.0 when unknown."""
        if not self.total_regions:
            return 0.0
        return len(self.regions) / self.total_regions


def merge_coverage(a: CoverageMap, b: CoverageMap) -> CoverageMap:
    if (
        a.total_regions is not None
        and b.total_regions is not None
        and a.total_regions != b.total_regions
    ):
        raise ValueError(
            f"cannot merge coverage with different totals: "
            f"{a.total_regions} vs {b.total_regions}"
        )
    total = a.total_regions if a.total_regions is not None else b.total_regions
    return CoverageMap(regions=a.regions | b.regions, total_regions=total)


@dataclass(frozen=True)
class SliceReport:
    """Outcome of one execution slice of one driver."""

    driver_id: str
    new_regions: frozenset[str]
    exec_seconds: float
    crashed: bool
    crash_info: str | None = None
    failure_info: str | None = None  # environment failure; no coverage credited

    def __post_init__(self) -> None:
        if self.exec_seconds <= 0:
            raise ValueError("a slice always consumes time")
        if self.crashed != (self.crash_info is not None):
            raise ValueError("crash_info must be present exactly when crashed")


@dataclass(frozen=True)
class CompileResult:
    ok: bool
    binary: Path | None
    diagnostics: str


class Toolchain(ABC):
    @abstractmethod
    def compile(self, driver: "DriverSource", workdir: Path) -> CompileResult:
        raise NotImplementedError


class CToolchain(Toolchain):
    """Invokes an external compiler through a command template.

    The template must contain ``{src}`` and ``{out}`` placeholders;
    sanitizer flags are appended verbatim after the rendered command.
    """

    def __init__(self, command_template: str, sanitizers: Iterable[str] = ()) -> None:
        if "{src}" not in command_template or "{out}" not in command_template:
            raise ToolchainError("compile template needs {src} and {out} placeholders")
        self._template = command_template
        self._sanitizers = list(sanitizers)

    def compile(self, driver: "DriverSource", workdir: Path) -> CompileResult:
        workdir.mkdir(parents=True, exist_ok=True)
        suffix = ".c" if driver.language == "c" else ".cc"
        src = workdir / f"driver{suffix}"
        out = workdir / "driver.bin"
        src.write_text(driver.text)
        command = [
            part.format(src=str(src), out=str(out))
            for part in shlex.split(self._template)
        ] + self._sanitizers
        try:
            proc = subprocess.run(command, capture_output=True, text=True)
        except FileNotFoundError as exc:
            raise ToolchainError(f"compiler not found: {command[0]}") from exc
        if proc.returncode == 0 and out.exists():
            return CompileResult(ok=True, binary=out, diagnostics="")
        return CompileResult(ok=False, binary=None, diagnostics=proc.stderr + proc.stdout)


class ToyToolchain(Toolchain):
    """Checks toy call scripts: ``call NAME`` / ``call NAME $input`` lines.

    Diagnostics mimic clang's one-line format so the same classifier and
    retriever patterns apply to toy drivers.
    """

    def __init__(self, api_names: Iterable[str]) -> None:
        self._api_names = frozenset(api_names)

    def compile(self, driver: "DriverSource", workdir: Path) -> CompileResult:
        errors: list[str] = []
        calls = 0
        for lineno, line in enumerate(driver.text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = stripped.split()
            if fields[0] != "call" or len(fields) == 1:
                errors.append(f"driver.toy:{lineno}:1: error: expected expression")
                continue
            name = fields[1]
            if name not in self._api_names:
                errors.append(
                    f"driver.toy:{lineno}:6: error: use of undeclared identifier '{name}'"
                )
                continue
            if len(fields) > 3 or (len(fields) == 3 and fields[2] != "$input"):
                errors.append(
                    f"driver.toy:{lineno}:6: error: too many arguments to function call"
                )
                continue
            calls += 1
        if calls == 0 and not errors:
            errors.append("driver.toy:1:1: error: expected expression")
        if errors:
            return CompileResult(ok=False, binary=None, diagnostics="\n".join(errors))
        workdir.mkdir(parents=True, exist_ok=True)
        script = workdir / "driver.toy"
        script.write_text(driver.text)
        return CompileResult(ok=True, binary=script, diagnostics="")


def compile_driver(driver: "DriverSource", toolchain: Toolchain, workdir: Path) -> CompileResult:
    return toolchain.compile(driver, workdir)


class ExecutionAdapter(ABC):
    """Runs one driver for one slice. Implementations must be reentrant."""

    @property
    @abstractmethod
    def total_regions(self) -> int | None:
        raise NotImplementedError

    @abstractmethod
    def run(self, record, duration_seconds: float) -> SliceReport:
        """``record`` carries the driver, its binary, and seen coverage."""
        raise NotImplementedError


def _directory_bytes(root: Path) -> int:
    total = 0
    for dirpath, _, filenames in os.walk(root):
        for name in filenames:
            try:
                total += (Path(dirpath) / name).stat().st_size
            except OSError:
                continue
    return total


def parse_coverage_lines(text: str) -> frozenset[str]:
    """Default coverage reader: one ``<file>:<region-id>`` per line."""
    regions = set()
    for line in text.splitlines():
        line = line.strip()
        if line and ":" in line:
            regions.add(line)
    return frozenset(regions)


class FuzzerAdapter(ExecutionAdapter):
    """Drives an external fuzzer binary with suspend/resume via the corpus.

    ``run_template`` placeholders: ``{bin}`` ``{corpus}`` ``{seconds}``.
    ``coverage_template`` placeholders: ``{bin}`` ``{corpus}``; its stdout
    goes through ``coverage_reader`` to produce the cumulative region set.
    """

    def __init__(
        self,
        run_template: str,
        coverage_template: str,
        workroot: Path,
        quota_bytes: int = DEFAULT_WORKDIR_QUOTA_BYTES,
        coverage_reader: Callable[[str], frozenset[str]] = parse_coverage_lines,
    ) -> None:
        self._run_template = run_template
        self._coverage_template = coverage_template
        self._workroot = Path(workroot)
        self._quota_bytes = quota_bytes
        self._read_coverage = coverage_reader

    @property
    def total_regions(self) -> int | None:
        return None

    def _render(self, template: str, **values: str) -> list[str]:
        return [part.format(**values) for part in shlex.split(template)]

    def run(self, record, duration_seconds: float) -> SliceReport:
        driver_id = record.driver.id
        if record.binary is None:
            raise ToolchainError(f"driver {driver_id} has no compiled binary")
        workdir = self._workroot / driver_id
        corpus = workdir / "corpus"
        corpus.mkdir(parents=True, exist_ok=True)
        command = self._render(
            self._run_template,
            bin=str(record.binary),
            corpus=str(corpus),
            seconds=str(int(duration_seconds)),
        )
        try:
            proc = subprocess.run(
                command,
                capture_output=True,
                text=True,
                cwd=workdir,
                timeout=duration_seconds * 2 + 30,
            )
        except FileNotFoundError as exc:
            raise ToolchainError(f"fuzzer not found: {command[0]}") from exc
        except subprocess.TimeoutExpired:
            proc = None
        elapsed = duration_seconds
        if _directory_bytes(workdir) > self._quota_bytes:
            return SliceReport(
                driver_id=driver_id,
                new_regions=frozenset(),
                exec_seconds=elapsed,
                crashed=False,
                failure_info=OUT_OF_SPACE_SIGNAL,
            )
        if proc is not None and proc.returncode != 0:
            tail = (proc.stderr or proc.stdout or "").strip()[-2000:]
            return SliceReport(
                driver_id=driver_id,
                new_regions=frozenset(),
                exec_seconds=elapsed,
                crashed=True,
                crash_info=tail or f"fuzzer exited with {proc.returncode}",
            )
        cov_command = self._render(
            self._coverage_template, bin=str(record.binary), corpus=str(corpus)
        )
        try:
            cov = subprocess.run(cov_command, capture_output=True, text=True, cwd=workdir)
        except FileNotFoundError as exc:
            raise ToolchainError(f"coverage tool not found: {cov_command[0]}") from exc
        if cov.returncode != 0:
            return SliceReport(
                driver_id=driver_id,
                new_regions=frozenset(),
                exec_seconds=elapsed,
                crashed=False,
                failure_info=f"coverage export failed:\n{cov.stderr.strip()}",
            )
        cumulative = self._read_coverage(cov.stdout)
        new = cumulative - record.coverage.regions
        return SliceReport(
            driver_id=driver_id,
            new_regions=frozenset(new),
            exec_seconds=elapsed,
            crashed=False,
        )


def run_slice(record, duration_seconds: float, adapter: ExecutionAdapter) -> SliceReport:
    """One time slice of one driver; validates the adapter's report."""
    report = adapter.run(record, duration_seconds)
    if report.driver_id != record.driver.id:
        raise ValueError("adapter reported a different driver id")
    return report
