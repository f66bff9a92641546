"""Command-line interface, exercised in process through main(argv)."""

import json

import pytest

from fuzzmill.cli import main
from fuzzmill.constraints import enumerate_groups

from failure_corpus import CORPUS


@pytest.fixture
def campaign_config_file(tmp_path, kv_spec_file):
    path = tmp_path / "campaign.toml"
    path.write_text(
        'spec_path = "{}"\n'
        'mode = "sim"\n'
        "seed = 11\n"
        "rounds = 4\n"
        "group_batch_k = 2\n"
        "driver_batch_n = 2\n"
        "window = 32\n"
        'workdir = "{}"\n'.format(kv_spec_file, tmp_path / "work")
    )
    return path


class TestSolve:
    def test_writes_jsonl_and_reports_count(self, tmp_path, kv_spec_file, kv_spec, capsys):
        out = tmp_path / "groups.jsonl"
        code = main(
            ["solve", "--spec", str(kv_spec_file), "--min", "2", "--max", "3",
             "--cap", "10", "--seed", "7", "--out", str(out)]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 10
        expected = [
            g.sorted_members()
            for g in enumerate_groups(kv_spec, size_range=(2, 3), cap=10, order_seed=7)
        ]
        assert [json.loads(line)["members"] for line in lines] == expected
        assert capsys.readouterr().err.strip() == "10 groups"

    def test_stdout_when_no_out(self, kv_spec_file, capsys):
        assert main(["solve", "--spec", str(kv_spec_file), "--cap", "3"]) == 0
        captured = capsys.readouterr()
        assert len(captured.out.splitlines()) == 3
        assert all(json.loads(line)["members"] for line in captured.out.splitlines())

    def test_no_implicit_flag_widens_the_stream(self, kv_spec_file, capsys):
        main(["solve", "--spec", str(kv_spec_file)])
        strict = len(capsys.readouterr().out.splitlines())
        main(["solve", "--spec", str(kv_spec_file), "--no-implicit"])
        loose = len(capsys.readouterr().out.splitlines())
        assert loose > strict

    def test_bad_spec_is_an_error_exit(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{}")
        assert main(["solve", "--spec", str(bad)]) == 1
        assert "error:" in capsys.readouterr().err

    def test_missing_spec_file_is_an_error_exit(self, tmp_path, capsys):
        assert main(["solve", "--spec", str(tmp_path / "nope.json")]) == 1
        assert "error:" in capsys.readouterr().err


class TestClassify:
    def test_single_file(self, tmp_path, capsys):
        text, tag = CORPUS[0]
        path = tmp_path / "diag.txt"
        path.write_text(text)
        assert main(["classify", str(path)]) == 0
        assert capsys.readouterr().out.strip() == tag

    def test_stdin(self, capsys, monkeypatch):
        import io

        text, tag = CORPUS[5]
        monkeypatch.setattr("sys.stdin", io.StringIO(text))
        assert main(["classify"]) == 0
        assert capsys.readouterr().out.strip() == tag

    def test_multiple_files_are_labelled(self, tmp_path, capsys):
        paths = []
        for index, (text, _) in enumerate(CORPUS[:3]):
            path = tmp_path / f"d{index}.txt"
            path.write_text(text)
            paths.append(str(path))
        assert main(["classify", *paths]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 3
        for path, line, (_, tag) in zip(paths, lines, CORPUS[:3]):
            assert line == f"{path}: {tag}"

    def test_verbose_shows_matched_pattern(self, tmp_path, capsys):
        text, tag = CORPUS[0]
        path = tmp_path / "diag.txt"
        path.write_text(text)
        assert main(["classify", "-v", str(path)]) == 0
        out = capsys.readouterr().out.strip()
        assert out.startswith(tag + "\t")
        assert out.split("\t", 1)[1] in text

    def test_token_budget_flag(self, tmp_path, capsys):
        path = tmp_path / "long.txt"
        path.write_text("x" * 100)
        assert main(["classify", "--token-budget", "10", str(path)]) == 0
        assert capsys.readouterr().out.strip() == "G5_token_limit"


class TestCampaignCommands:
    def test_run_prints_table_and_persists_state(
        self, tmp_path, campaign_config_file, capsys
    ):
        state = tmp_path / "state.json"
        code = main(
            ["campaign", "run", "--config", str(campaign_config_file),
             "--state", str(state)]
        )
        assert code == 0
        captured = capsys.readouterr()
        assert "rounds completed" in captured.out
        assert str(state) in captured.err
        assert json.loads(state.read_text())["rounds_completed"] == 4

    def test_resume_continues_to_the_round_target(
        self, tmp_path, campaign_config_file, capsys
    ):
        state = tmp_path / "state.json"
        main(["campaign", "run", "--config", str(campaign_config_file),
              "--state", str(state)])
        capsys.readouterr()
        # Rewind the round counter so the resumed run has work left.
        doc = json.loads(state.read_text())
        doc["config"]["rounds"] = 6
        state.write_text(json.dumps(doc))
        assert main(["campaign", "resume", "--state", str(state)]) == 0
        rows = dict(
            line.rsplit(None, 1)
            for line in capsys.readouterr().out.splitlines()
            if line.strip()
        )
        assert rows["rounds completed"] == "6"
        assert json.loads(state.read_text())["rounds_completed"] == 6

    def test_report_formats_round_trip(self, tmp_path, campaign_config_file, capsys):
        state = tmp_path / "state.json"
        main(["campaign", "run", "--config", str(campaign_config_file),
              "--state", str(state)])
        capsys.readouterr()

        assert main(["campaign", "report", "--state", str(state),
                     "--format", "json"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["rounds_completed"] == 4

        assert main(["campaign", "report", "--state", str(state),
                     "--format", "table"]) == 0
        assert "coverage fraction" in capsys.readouterr().out

        assert main(["campaign", "report", "--state", str(state),
                     "--format", "csv"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "slice_index,cumulative_regions"
        assert len(lines) == 1 + len(report["coverage_series"])

    def test_report_csv_with_out_writes_figures(
        self, tmp_path, campaign_config_file, capsys
    ):
        state = tmp_path / "state.json"
        main(["campaign", "run", "--config", str(campaign_config_file),
              "--state", str(state)])
        capsys.readouterr()
        out = tmp_path / "report" / "coverage.csv"
        assert main(["campaign", "report", "--state", str(state),
                     "--format", "csv", "--out", str(out)]) == 0
        err = capsys.readouterr().err
        assert out.is_file()
        assert out.with_name("coverage_coverage.png").is_file()
        assert out.with_name("coverage_failures.png").is_file()
        assert str(out) in err

    def test_ablation_flags_override_config(self, tmp_path, campaign_config_file, capsys):
        state = tmp_path / "state.json"
        code = main(
            ["campaign", "run", "--config", str(campaign_config_file),
             "--state", str(state), "--no-implicit", "--round-robin-drivers"]
        )
        assert code == 0
        capsys.readouterr()
        doc = json.loads(state.read_text())
        assert doc["config"]["check_implicit"] is False
        assert doc["config"]["round_robin_drivers"] is True

    def test_resume_missing_state_is_an_error_exit(self, tmp_path, capsys):
        assert main(["campaign", "resume", "--state", str(tmp_path / "no.json")]) == 1
        assert "error:" in capsys.readouterr().err

    def test_run_with_unknown_config_key_is_an_error_exit(self, tmp_path, capsys):
        config = tmp_path / "bad.toml"
        config.write_text('spec_path = "x.json"\nturbo = true\n')
        assert main(["campaign", "run", "--config", str(config)]) == 1
        assert "unknown config keys" in capsys.readouterr().err
