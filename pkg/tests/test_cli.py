import json

import pytest

from ssvepkit.cli import main
from ssvepkit.io import load_dataset

SYNTH_SPEC = """
subjects = 2
trials_per_freq = 2
snr_db = 18
harmonics = 2
seed = 31
frequencies = 6.66,7.50,8.57,10.00,12.00
rate = 250
duration = 2
channels = 4
"""

FAST_CONFIG = """
duration = 2.0
features.segment_len = 128
features.nfft = 256
"""


@pytest.fixture(scope="module")
def dataset_file(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    spec = root / "synth.cfg"
    spec.write_text(SYNTH_SPEC)
    out = root / "data.ssvb"
    assert main(["synth", "--spec", str(spec), "--out", str(out)]) == 0
    return out


class TestSynth:
    def test_writes_loadable_dataset(self, dataset_file):
        ds = load_dataset(dataset_file)
        assert len(ds) == 2 * 5 * 2
        assert ds.channel_count == 4

    def test_missing_spec_exits_2(self, tmp_path, capsys):
        code = main(["synth", "--spec", str(tmp_path / "nope.cfg"), "--out", str(tmp_path / "o.ssvb")])
        assert code == 2

    def test_bad_spec_key_exits_2(self, tmp_path, capsys):
        spec = tmp_path / "bad.cfg"
        spec.write_text("subjects = 2\nwhatsthis = 4\n")
        assert main(["synth", "--spec", str(spec), "--out", str(tmp_path / "o.ssvb")]) == 2
        assert "whatsthis" in capsys.readouterr().err

    def test_same_seed_gives_identical_files(self, tmp_path):
        spec = tmp_path / "synth.cfg"
        spec.write_text(SYNTH_SPEC)
        a, b = tmp_path / "a.ssvb", tmp_path / "b.ssvb"
        assert main(["synth", "--spec", str(spec), "--out", str(a)]) == 0
        assert main(["synth", "--spec", str(spec), "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_seed_flag_overrides(self, tmp_path):
        spec = tmp_path / "synth.cfg"
        spec.write_text(SYNTH_SPEC)
        a, b = tmp_path / "a.ssvb", tmp_path / "b.ssvb"
        assert main(["synth", "--spec", str(spec), "--out", str(a), "--seed", "1"]) == 0
        assert main(["synth", "--spec", str(spec), "--out", str(b), "--seed", "2"]) == 0
        assert a.read_bytes() != b.read_bytes()


class TestRun:
    def test_smoke_run_prints_table(self, dataset_file, tmp_path, capsys):
        config = tmp_path / "fast.cfg"
        config.write_text(FAST_CONFIG)
        code = main(["run", "--dataset", str(dataset_file), "--config", str(config)])
        out = capsys.readouterr().out
        assert code == 0
        assert "Mean Acc." in out
        assert "S001" in out

    def test_output_files_written(self, dataset_file, tmp_path):
        config = tmp_path / "fast.cfg"
        config.write_text(FAST_CONFIG)
        out_dir = tmp_path / "results"
        code = main(
            ["run", "--dataset", str(dataset_file), "--config", str(config), "--out", str(out_dir)]
        )
        assert code == 0
        for name in ("report.txt", "report.json", "report.jsonl", "report.csv", "accuracy.png", "latency.png"):
            assert (out_dir / name).exists(), name
        record = json.loads((out_dir / "report.json").read_text())
        assert set(record["subject_accuracy"]) == {"S001", "S002"}
        lines = (out_dir / "report.jsonl").read_text().strip().splitlines()
        assert json.loads(lines[-1])["kind"] == "summary"

    def test_unknown_config_key_exits_2(self, dataset_file, tmp_path, capsys):
        config = tmp_path / "bad.cfg"
        config.write_text("features.mystery = 3\n")
        assert main(["run", "--dataset", str(dataset_file), "--config", str(config)]) == 2
        assert "features.mystery" in capsys.readouterr().err

    def test_select_d_too_large_exits_2(self, dataset_file, tmp_path, capsys):
        config = tmp_path / "bad.cfg"
        config.write_text(FAST_CONFIG + "select.method = mim\nselect.d = 5000\n")
        assert main(["run", "--dataset", str(dataset_file), "--config", str(config)]) == 2
        assert "select.d" in capsys.readouterr().err

    def test_failed_folds_exit_3_with_partial_report(self, dataset_file, tmp_path):
        config = tmp_path / "failing.cfg"
        # svd dimension above the per-fold training size: every fold fails at fit
        config.write_text(FAST_CONFIG + "select.method = svd\nselect.d = 15\n")
        out_dir = tmp_path / "partial"
        code = main(
            ["run", "--dataset", str(dataset_file), "--config", str(config), "--out", str(out_dir)]
        )
        assert code == 3
        assert (out_dir / "report.txt").exists()
        assert "FAILED" in (out_dir / "report.txt").read_text()

    def test_preset_flag(self, dataset_file, capsys):
        code = main(["run", "--dataset", str(dataset_file), "--preset", "default"])
        # default preset needs 5 s trials; this dataset has 2 s ones
        assert code == 2

    @pytest.mark.parametrize("protocol", ["loo", "loo_sample"])
    def test_loo_protocol(self, dataset_file, tmp_path, capsys, protocol):
        config = tmp_path / "fast.cfg"
        config.write_text(FAST_CONFIG)
        code = main(
            ["run", "--dataset", str(dataset_file), "--config", str(config), "--protocol", protocol]
        )
        assert code == 0


class TestGrid:
    def test_single_combo_grid(self, dataset_file, tmp_path, capsys):
        config = tmp_path / "fast.cfg"
        config.write_text(FAST_CONFIG)
        out_dir = tmp_path / "grid"
        code = main(
            [
                "grid",
                "--dataset", str(dataset_file),
                "--config", str(config),
                "--out", str(out_dir),
                "--nfft-grid", "256",
                "--segment-grid", "128",
                "--overlap-grid", "0.5",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "Mean Acc." in out
        assert (out_dir / "grid.csv").exists()
        assert (out_dir / "grid.png").exists()

    def test_all_infeasible_exits_3(self, dataset_file, tmp_path, capsys):
        config = tmp_path / "fast.cfg"
        config.write_text(FAST_CONFIG)
        out_dir = tmp_path / "grid"
        code = main(
            [
                "grid",
                "--dataset", str(dataset_file),
                "--config", str(config),
                "--out", str(out_dir),
                "--nfft-grid", "64",
                "--segment-grid", "1000,2000",
                "--overlap-grid", "0.5",
            ]
        )
        assert code == 3
        out = capsys.readouterr().out
        assert out.count("SKIPPED") == 2
        grid_record = json.loads((out_dir / "grid.json").read_text())
        assert grid_record["rows"] == []
        assert len(grid_record["skipped"]) == 2


class TestReportVerb:
    def test_rerender_from_json(self, dataset_file, tmp_path, capsys):
        config = tmp_path / "fast.cfg"
        config.write_text(FAST_CONFIG)
        out_dir = tmp_path / "first"
        main(["run", "--dataset", str(dataset_file), "--config", str(config), "--out", str(out_dir)])
        capsys.readouterr()
        second = tmp_path / "second"
        code = main(["report", "--input", str(out_dir / "report.json"), "--out", str(second)])
        assert code == 0
        assert "Mean Acc." in capsys.readouterr().out
        assert (second / "accuracy.png").exists()

    def test_bad_json_exits_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["report", "--input", str(bad)]) == 2


class TestInspect:
    def test_summary(self, dataset_file, capsys):
        assert main(["inspect", "--dataset", str(dataset_file)]) == 0
        out = capsys.readouterr().out
        assert "trials:     20" in out
        assert "channels:   4" in out
        assert "6.66" in out

    def test_missing_dataset_exits_2(self, tmp_path):
        assert main(["inspect", "--dataset", str(tmp_path / "none.ssvb")]) == 2
