import stat

import pytest

from fuzzmill.executor import (
    CoverageMap,
    CToolchain,
    FuzzerAdapter,
    SliceReport,
    ToolchainError,
    ToyToolchain,
    merge_coverage,
    parse_coverage_lines,
    run_slice,
)
from fuzzmill.factory import DriverSource
from fuzzmill.failures import OUT_OF_SPACE_SIGNAL, classify_failure
from fuzzmill.model import ApiGroup


def _toy_driver(text, did="d1", group=("kv_open", "kv_close")):
    return DriverSource(
        id=did, group=ApiGroup.of(*group), language="toy", text=text, generation=0
    )


class TestCoverageMap:
    def test_fraction(self):
        cov = CoverageMap(regions=frozenset({"r1", "r2"}), total_regions=8)
        assert cov.fraction() == pytest.approx(0.25)
        assert len(cov) == 2

    def test_fraction_unknown_total_is_zero(self):
        assert CoverageMap(regions=frozenset({"r1"})).fraction() == 0.0

    def test_cannot_exceed_total(self):
        with pytest.raises(ValueError):
            CoverageMap(regions=frozenset({"a", "b"}), total_regions=1)

    def test_merge_unions_regions(self):
        a = CoverageMap(regions=frozenset({"r1"}), total_regions=4)
        b = CoverageMap(regions=frozenset({"r2"}), total_regions=4)
        merged = merge_coverage(a, b)
        assert merged.regions == {"r1", "r2"}
        assert merged.total_regions == 4

    def test_merge_is_commutative_and_idempotent(self):
        a = CoverageMap(regions=frozenset({"r1", "r3"}))
        b = CoverageMap(regions=frozenset({"r2"}))
        assert merge_coverage(a, b) == merge_coverage(b, a)
        assert merge_coverage(a, a) == a

    def test_merge_takes_the_known_total(self):
        a = CoverageMap(regions=frozenset({"r1"}))
        b = CoverageMap(regions=frozenset(), total_regions=9)
        assert merge_coverage(a, b).total_regions == 9

    def test_merge_rejects_conflicting_totals(self):
        a = CoverageMap(total_regions=4)
        b = CoverageMap(total_regions=5)
        with pytest.raises(ValueError):
            merge_coverage(a, b)


class TestSliceReport:
    def test_crash_info_must_accompany_crash(self):
        with pytest.raises(ValueError):
            SliceReport("d", frozenset(), 1.0, crashed=True)
        with pytest.raises(ValueError):
            SliceReport("d", frozenset(), 1.0, crashed=False, crash_info="boom")

    def test_slices_consume_time(self):
        with pytest.raises(ValueError):
            SliceReport("d", frozenset(), 0.0, crashed=False)


class TestToyToolchain:
    def _compile(self, text, tmp_path, apis=("kv_open", "kv_close")):
        tc = ToyToolchain(apis)
        return tc.compile(_toy_driver(text), tmp_path)

    def test_valid_script_compiles(self, tmp_path):
        result = self._compile("call kv_open $input\ncall kv_close\n", tmp_path)
        assert result.ok
        assert result.binary is not None and result.binary.exists()

    def test_comments_and_blanks_ignored(self, tmp_path):
        result = self._compile("# setup\n\ncall kv_open $input\n", tmp_path)
        assert result.ok

    def test_unknown_api_is_an_undeclared_identifier(self, tmp_path):
        result = self._compile("call kv_opne $input\n", tmp_path)
        assert not result.ok
        assert "use of undeclared identifier 'kv_opne'" in result.diagnostics
        assert classify_failure(result.diagnostics).tag == "G3_nonexisting_identifier"

    def test_junk_line_is_expected_expression(self, tmp_path):
        result = self._compile("open the database\n", tmp_path)
        assert not result.ok
        assert "error: expected expression" in result.diagnostics
        assert classify_failure(result.diagnostics).tag == "G1_corrupted"

    def test_extra_arguments_rejected(self, tmp_path):
        result = self._compile("call kv_open $input extra\n", tmp_path)
        assert not result.ok
        assert "too many arguments to function call" in result.diagnostics
        assert classify_failure(result.diagnostics).tag == "G4_type_error"

    def test_wrong_argument_rejected(self, tmp_path):
        result = self._compile("call kv_open @stdin\n", tmp_path)
        assert not result.ok
        assert "too many arguments" in result.diagnostics

    def test_empty_script_rejected(self, tmp_path):
        result = self._compile("# nothing here\n", tmp_path)
        assert not result.ok
        assert "error: expected expression" in result.diagnostics

    def test_diagnostics_carry_line_numbers(self, tmp_path):
        result = self._compile("call kv_open\nnonsense\n", tmp_path)
        assert "driver.toy:2:1:" in result.diagnostics


class TestCToolchain:
    def test_template_needs_placeholders(self):
        with pytest.raises(ToolchainError):
            CToolchain("cc -o out")

    def test_compiles_a_real_driver(self, tmp_path):
        driver = DriverSource(
            id="c1",
            group=ApiGroup.of("main"),
            language="c",
            text="int main(void) { return 0; }\n",
            generation=0,
        )
        tc = CToolchain("cc {src} -o {out}")
        result = tc.compile(driver, tmp_path / "build")
        assert result.ok
        assert result.binary.exists()

    def test_compile_error_produces_diagnostics(self, tmp_path):
        driver = DriverSource(
            id="c2",
            group=ApiGroup.of("main"),
            language="c",
            text="int main(void) { return nonexistent_function(); }\n",
            generation=0,
        )
        tc = CToolchain("cc -Werror=implicit-function-declaration {src} -o {out}")
        result = tc.compile(driver, tmp_path / "build")
        assert not result.ok
        assert "nonexistent_function" in result.diagnostics

    def test_missing_compiler_is_a_toolchain_error(self, tmp_path):
        driver = _toy_driver("x")
        tc = CToolchain("definitely-not-a-compiler-7f3a {src} -o {out}")
        with pytest.raises(ToolchainError):
            tc.compile(driver, tmp_path / "build")

    def test_sanitizers_appended(self, tmp_path):
        driver = DriverSource(
            id="c3",
            group=ApiGroup.of("main"),
            language="c",
            text="#include <stdlib.h>\nint main(void) { free(malloc(4)); return 0; }\n",
            generation=0,
        )
        tc = CToolchain("cc {src} -o {out}", sanitizers=["-fsanitize=address"])
        result = tc.compile(driver, tmp_path / "build")
        assert result.ok


def test_parse_coverage_lines():
    text = "src/kv.c:12\nsrc/kv.c:44\n\nnot a region\nsrc/iter.c:3\n"
    assert parse_coverage_lines(text) == {"src/kv.c:12", "src/kv.c:44", "src/iter.c:3"}


class _Record:
    """Minimal stand-in for a DriverRecord as the adapter sees it."""

    def __init__(self, driver, binary, regions=frozenset()):
        self.driver = driver
        self.binary = binary
        self.coverage = CoverageMap(regions=frozenset(regions))


def _script(path, body):
    path.write_text("#!/bin/sh\n" + body)
    path.chmod(path.stat().st_mode | stat.S_IXUSR)
    return path


@pytest.fixture
def fake_fuzzer(tmp_path):
    """A fake fuzzer: run writes a corpus file, coverage prints regions."""
    run = _script(
        tmp_path / "fake-run.sh",
        'echo "seed" > "$2"/entry-1\nexit 0\n',
    )
    cov = _script(
        tmp_path / "fake-cov.sh",
        'printf "src/kv.c:1\\nsrc/kv.c:2\\nsrc/iter.c:9\\n"\n',
    )
    return run, cov


class TestFuzzerAdapter:
    def _adapter(self, run, cov, tmp_path, **kwargs):
        return FuzzerAdapter(
            run_template=f"{run} {{bin}} {{corpus}} {{seconds}}",
            coverage_template=f"{cov} {{bin}} {{corpus}}",
            workroot=tmp_path / "slices",
            **kwargs,
        )

    def _record(self, tmp_path, regions=frozenset()):
        binary = tmp_path / "driver.bin"
        binary.write_text("binary")
        driver = _toy_driver("call kv_open $input", did="drv-7")
        return _Record(driver, binary, regions)

    def test_reports_new_regions(self, fake_fuzzer, tmp_path):
        run, cov = fake_fuzzer
        adapter = self._adapter(run, cov, tmp_path)
        report = run_slice(self._record(tmp_path), 5.0, adapter)
        assert report.driver_id == "drv-7"
        assert report.new_regions == {"src/kv.c:1", "src/kv.c:2", "src/iter.c:9"}
        assert not report.crashed
        assert report.exec_seconds == 5.0

    def test_already_seen_regions_not_new(self, fake_fuzzer, tmp_path):
        run, cov = fake_fuzzer
        adapter = self._adapter(run, cov, tmp_path)
        record = self._record(tmp_path, regions={"src/kv.c:1", "src/kv.c:2"})
        report = run_slice(record, 5.0, adapter)
        assert report.new_regions == {"src/iter.c:9"}

    def test_nonzero_exit_is_a_crash_with_stderr_tail(self, fake_fuzzer, tmp_path):
        crash = _script(
            tmp_path / "crash.sh",
            'echo "ERROR: AddressSanitizer: heap-use-after-free" >&2\nexit 1\n',
        )
        _, cov = fake_fuzzer
        adapter = self._adapter(crash, cov, tmp_path)
        report = run_slice(self._record(tmp_path), 5.0, adapter)
        assert report.crashed
        assert "heap-use-after-free" in report.crash_info

    def test_quota_breach_is_the_out_of_space_signal(self, fake_fuzzer, tmp_path):
        run, cov = fake_fuzzer
        adapter = self._adapter(run, cov, tmp_path, quota_bytes=2)
        report = run_slice(self._record(tmp_path), 5.0, adapter)
        assert not report.crashed
        assert report.failure_info == OUT_OF_SPACE_SIGNAL
        assert classify_failure(report.failure_info).tag == "G6_out_of_space"
        assert report.new_regions == frozenset()

    def test_coverage_export_failure_is_reported_not_crash(self, fake_fuzzer, tmp_path):
        run, _ = fake_fuzzer
        bad_cov = _script(tmp_path / "bad-cov.sh", 'echo "profraw corrupt" >&2\nexit 3\n')
        adapter = self._adapter(run, bad_cov, tmp_path)
        report = run_slice(self._record(tmp_path), 5.0, adapter)
        assert not report.crashed
        assert "profraw corrupt" in report.failure_info

    def test_missing_fuzzer_is_a_toolchain_error(self, fake_fuzzer, tmp_path):
        _, cov = fake_fuzzer
        adapter = FuzzerAdapter(
            run_template="no-such-fuzzer-bin {bin} {corpus} {seconds}",
            coverage_template=f"{cov} {{bin}} {{corpus}}",
            workroot=tmp_path / "slices",
        )
        with pytest.raises(ToolchainError):
            adapter.run(self._record(tmp_path), 5.0)

    def test_missing_binary_rejected(self, fake_fuzzer, tmp_path):
        run, cov = fake_fuzzer
        adapter = self._adapter(run, cov, tmp_path)
        record = self._record(tmp_path)
        record.binary = None
        with pytest.raises(ToolchainError):
            adapter.run(record, 5.0)

    def test_run_slice_validates_the_reported_id(self, fake_fuzzer, tmp_path):
        run, cov = fake_fuzzer

        class LyingAdapter(FuzzerAdapter):
            def run(self, record, duration_seconds):
                report = super().run(record, duration_seconds)
                return SliceReport(
                    driver_id="someone-else",
                    new_regions=report.new_regions,
                    exec_seconds=report.exec_seconds,
                    crashed=False,
                )

        adapter = LyingAdapter(
            run_template=f"{run} {{bin}} {{corpus}} {{seconds}}",
            coverage_template=f"{cov} {{bin}} {{corpus}}",
            workroot=tmp_path / "slices",
        )
        with pytest.raises(ValueError):
            run_slice(self._record(tmp_path), 5.0, adapter)
