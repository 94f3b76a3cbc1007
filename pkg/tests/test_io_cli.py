"""Round-trip tests for the file formats and end-to-end CLI checks.

CLI commands run in-process through ``main(argv)``; one smoke test goes
through the installed ``msent`` entry point.
"""

import hashlib
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from msentropy import io as msio
from msentropy.cli import _resolve, build_parser, main
from msentropy.entropy import EntropyProfile, ScaleRange
from msentropy.errors import InputFormatError
from msentropy.pipeline import ExperimentConfig, PipelineConfig, run_experiment
from msentropy.signals import ProtocolSpec, TimeSeries, generate_noise
from msentropy.pipeline import subject_epochs


def file_bytes(path):
    with open(path, "rb") as f:
        return f.read()


def tree_digest(root):
    h = hashlib.sha256()
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for name in sorted(filenames):
            p = os.path.join(dirpath, name)
            h.update(os.path.relpath(p, root).encode())
            h.update(file_bytes(p))
    return h.hexdigest()


class TestFormatFloat:
    def test_twelve_significant_digits(self):
        assert msio.format_float(math.pi) == "3.14159265359"
        assert msio.format_float(1e-10) == "1e-10"
        assert msio.format_float(0.0) == "0"

    def test_non_finite(self):
        assert msio.format_float(math.nan) == "nan"

    def test_parse_recovers_to_oracle_tolerance(self):
        rng = np.random.default_rng(0)
        for v in rng.standard_normal(200):
            back = float(msio.format_float(v))
            assert abs(back - v) <= 1e-11 * max(1.0, abs(v))


class TestTimeseriesRoundTrip:
    def test_values_fs_label_survive(self, tmp_path):
        ts = generate_noise("white", 300, 125.0, seed=3)
        ts = TimeSeries(ts.samples, ts.fs, label="probe")
        p = str(tmp_path / "sig.csv")
        msio.write_timeseries_csv(ts, p)
        back = msio.read_timeseries_csv(p)
        assert back.fs == 125.0
        assert back.label == "probe"
        np.testing.assert_allclose(back.samples, ts.samples, rtol=1e-11, atol=1e-14)

    def test_serialization_is_a_fixed_point(self, tmp_path):
        # writing what was read back reproduces the file byte for byte
        ts = generate_noise("pink", 257, 250.0, seed=9)
        p1 = str(tmp_path / "a.csv")
        p2 = str(tmp_path / "b.csv")
        msio.write_timeseries_csv(ts, p1)
        msio.write_timeseries_csv(msio.read_timeseries_csv(p1), p2)
        assert file_bytes(p1) == file_bytes(p2)
        assert file_bytes(str(tmp_path / "a.json")) == file_bytes(str(tmp_path / "b.json"))

    def test_explicit_fs_without_sidecar(self, tmp_path):
        p = str(tmp_path / "bare.csv")
        with open(p, "w") as f:
            f.write("value\n1.5\n2.5\n")
        back = msio.read_timeseries_csv(p, fs=100.0)
        assert back.fs == 100.0
        np.testing.assert_array_equal(back.samples, [1.5, 2.5])

    def test_missing_fs_rejected(self, tmp_path):
        p = str(tmp_path / "bare.csv")
        with open(p, "w") as f:
            f.write("value\n1.0\n")
        with pytest.raises(InputFormatError):
            msio.read_timeseries_csv(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputFormatError):
            msio.read_timeseries_csv(str(tmp_path / "nope.csv"))


class TestMalformedCsv:
    def write(self, tmp_path, text):
        p = str(tmp_path / "bad.csv")
        with open(p, "w") as f:
            f.write(text)
        return p

    def test_wrong_header_line_1(self, tmp_path):
        p = self.write(tmp_path, "wrong\n1.0\n")
        with pytest.raises(InputFormatError) as exc:
            msio.read_timeseries_csv(p, fs=1.0)
        assert exc.value.line == 1

    def test_bad_number_carries_line(self, tmp_path):
        p = self.write(tmp_path, "value\n1.0\noops\n2.0\n")
        with pytest.raises(InputFormatError) as exc:
            msio.read_timeseries_csv(p, fs=1.0)
        assert exc.value.line == 3

    def test_non_finite_sample_carries_line(self, tmp_path):
        p = self.write(tmp_path, "value\n1.0\ninf\n")
        with pytest.raises(InputFormatError) as exc:
            msio.read_timeseries_csv(p, fs=1.0)
        assert exc.value.line == 3

    def test_empty_body(self, tmp_path):
        p = self.write(tmp_path, "value\n")
        with pytest.raises(InputFormatError):
            msio.read_timeseries_csv(p, fs=1.0)


class TestEpochSetRoundTrip:
    def test_counts_rate_label_and_bytes(self, tmp_path):
        spec = ProtocolSpec(condition="CE", flicker_hz=15.0, n_stimuli=4,
                            stim_dur_s=2.0, n_baseline_epochs=2,
                            baseline_dur_s=3.0, fs=100.0, seed=4)
        epochs = subject_epochs(spec, 0, 0, 0, "Oz", 0.3)
        d1 = str(tmp_path / "set1")
        d2 = str(tmp_path / "set2")
        msio.write_epoch_set(epochs, d1)
        back = msio.read_epoch_set(d1)
        assert len(back.baseline_epochs) == 2
        assert len(back.stimulus_epochs) == 4
        assert back.fs == 100.0
        msio.write_epoch_set(back, d2)
        assert tree_digest(d1) == tree_digest(d2)

    def test_missing_metadata(self, tmp_path):
        d = tmp_path / "empty"
        d.mkdir()
        with pytest.raises(InputFormatError):
            msio.read_epoch_set(str(d))


class TestProfileRoundTrip:
    def test_write_read(self, tmp_path):
        prof = EntropyProfile("mse", "coarse", ScaleRange((1, 2, 5)),
                              np.array([1.25, math.nan, 0.5]))
        p = str(tmp_path / "prof.csv")
        msio.write_profile_csv(prof, p)
        scales, values = msio.read_profile_csv(p)
        assert tuple(scales) == (1, 2, 5)
        assert values[0] == 1.25 and values[2] == 0.5
        assert math.isnan(values[1])

    def test_bad_header(self, tmp_path):
        p = str(tmp_path / "p.csv")
        with open(p, "w") as f:
            f.write("a,b\n1,2\n")
        with pytest.raises(InputFormatError) as exc:
            msio.read_profile_csv(p)
        assert exc.value.line == 1


class TestTableReader:
    def test_reads_numbers_and_labels(self, tmp_path):
        p = str(tmp_path / "t.csv")
        with open(p, "w") as f:
            f.write("scale,test,value\n1,anova,0.5\n2,tukey-hsd,nan\n")
        header, rows = msio.read_table_csv(p)
        assert header == ["scale", "test", "value"]
        assert rows[0] == [1.0, "anova", 0.5]
        assert rows[1][1] == "tukey-hsd" and math.isnan(rows[1][2])

    def test_ragged_row_rejected(self, tmp_path):
        p = str(tmp_path / "t.csv")
        with open(p, "w") as f:
            f.write("a,b\n1\n")
        with pytest.raises(InputFormatError) as exc:
            msio.read_table_csv(p)
        assert exc.value.line == 2


def tiny_result():
    specs = {
        lbl: ProtocolSpec(condition=lbl, flicker_hz=hz, n_stimuli=3,
                          stim_dur_s=6.0, n_baseline_epochs=2,
                          baseline_dur_s=6.0, fs=100.0, seed=0)
        for lbl, hz in (("CE", 15.0), ("OE", 20.0))
    }
    cfg = ExperimentConfig(
        pipeline=PipelineConfig(scales=ScaleRange((1, 2, 3))), master_seed=1)
    return run_experiment(specs, 2, "mse", cfg)


class TestExperimentJsonRoundTrip:
    def test_dict_survives_json(self, tmp_path):
        d = msio.experiment_to_dict(tiny_result())
        p = str(tmp_path / "result.json")
        msio.write_experiment_json(d, p)
        assert msio.read_experiment_json(p) == d

    def test_schema_checked(self, tmp_path):
        p = str(tmp_path / "other.json")
        with open(p, "w") as f:
            json.dump({"schema": "something-else"}, f)
        with pytest.raises(InputFormatError):
            msio.read_experiment_json(p)

    def test_every_written_table_reads_back(self, tmp_path):
        d = msio.experiment_to_dict(tiny_result())
        out = str(tmp_path)
        paths = msio.write_figure_csvs(d, out)
        stats = os.path.join(out, "stats.csv")
        msio.write_stats_csv(d, stats)
        assert sorted(os.path.basename(p) for p in paths) == [
            "fig3A.csv", "fig3B.csv", "fig3C.csv",
            "fig4A.csv", "fig4B.csv", "fig4C.csv"]
        for p in paths + [stats]:
            header, rows = msio.read_table_csv(p)
            assert rows, p
            assert all(len(r) == len(header) for r in rows)


def run_cli(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


GEN_FAST = ["--conditions", "CE:15,OE:20", "--fs", "100", "--stim-dur", "4",
            "--baseline-dur", "6", "--n-stimuli", "2", "--n-baselines", "2"]


class TestCmdGen:
    def test_cardinality_and_determinism(self, tmp_path, capsys):
        d1, d2 = str(tmp_path / "a"), str(tmp_path / "b")
        for d in (d1, d2):
            code, out, err = run_cli(
                ["gen", "--out", d, "--subjects", "2", "--seed", "7"] + GEN_FAST,
                capsys)
            assert code == 0, err
        for s in ("subject_01", "subject_02"):
            for c in ("CE", "OE"):
                names = sorted(os.listdir(os.path.join(d1, s, c)))
                assert names == ["baseline_1.csv", "baseline_2.csv",
                                 "metadata.json", "stim_1.csv", "stim_2.csv"]
        assert tree_digest(d1) == tree_digest(d2)

    def test_seed_changes_output(self, tmp_path, capsys):
        d1, d2 = str(tmp_path / "a"), str(tmp_path / "b")
        run_cli(["gen", "--out", d1, "--subjects", "1", "--seed", "1"] + GEN_FAST,
                capsys)
        run_cli(["gen", "--out", d2, "--subjects", "1", "--seed", "2"] + GEN_FAST,
                capsys)
        assert tree_digest(d1) != tree_digest(d2)

    def test_unwritable_out_is_exit_2_with_path(self, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        target = str(blocker / "sub")
        code, out, err = run_cli(
            ["gen", "--out", target, "--subjects", "1"] + GEN_FAST, capsys)
        assert code == 2
        assert "file" in err


@pytest.fixture(scope="module")
def gen_dir(tmp_path_factory):
    d = str(tmp_path_factory.mktemp("gen"))
    assert main(["gen", "--out", d, "--subjects", "1", "--seed", "3",
                 "--conditions", "CE:15", "--fs", "100", "--stim-dur", "4",
                 "--baseline-dur", "20", "--n-stimuli", "2",
                 "--n-baselines", "2"]) == 0
    return d


class TestCmdPreprocessAndEmd:
    def test_preprocess_writes_readable_output(self, gen_dir, tmp_path, capsys):
        src = os.path.join(gen_dir, "subject_01", "CE", "baseline_1.csv")
        out = str(tmp_path / "pp.csv")
        code, _, err = run_cli(
            ["preprocess", "--input", src, "--fs", "100", "--out", out,
             "--highpass", "1", "--lowpass", "30"], capsys)
        assert code == 0, err
        back = msio.read_timeseries_csv(out)
        assert back.fs == 100.0

    def test_decimate_requires_integer_factor(self, gen_dir, tmp_path, capsys):
        src = os.path.join(gen_dir, "subject_01", "CE", "baseline_1.csv")
        code, _, err = run_cli(
            ["preprocess", "--input", src, "--fs", "100",
             "--out", str(tmp_path / "x.csv"), "--target-fs", "33"], capsys)
        assert code == 2
        assert "integer" in err

    def test_emd_modes_sum_back(self, gen_dir, tmp_path, capsys):
        src = os.path.join(gen_dir, "subject_01", "CE", "baseline_1.csv")
        out = str(tmp_path / "modes")
        code, _, err = run_cli(
            ["emd", "--input", src, "--fs", "100", "--out", out], capsys)
        assert code == 0, err
        names = sorted(os.listdir(out))
        assert "residue.csv" in names and "metadata.json" in names
        imfs = [n for n in names if n.startswith("imf_")]
        total = None
        for n in imfs + ["residue.csv"]:
            ts = msio.read_timeseries_csv(os.path.join(out, n), fs=100.0)
            total = ts.samples if total is None else total + ts.samples
        orig = msio.read_timeseries_csv(src, fs=100.0)
        np.testing.assert_allclose(total, orig.samples, atol=1e-9)


class TestCmdEntropy:
    def test_row_count_matches_scales(self, gen_dir, tmp_path, capsys):
        src = os.path.join(gen_dir, "subject_01", "CE", "baseline_1.csv")
        out = str(tmp_path / "prof.csv")
        code, _, err = run_cli(
            ["entropy", "--input", src, "--fs", "100", "--out", out,
             "--method", "mse", "--scales", "1..3"], capsys)
        assert code == 0, err
        scales, values = msio.read_profile_csv(out)
        assert tuple(scales) == (1, 2, 3)
        assert np.all(np.isfinite(values))

    def test_methods_differ_on_same_input(self, gen_dir, tmp_path, capsys):
        src = os.path.join(gen_dir, "subject_01", "CE", "baseline_1.csv")
        outs = {}
        for m in ("mse", "mife"):
            out = str(tmp_path / f"{m}.csv")
            code, _, err = run_cli(
                ["entropy", "--input", src, "--fs", "100", "--out", out,
                 "--method", m, "--scales", "1..3", "--band", "1,4"], capsys)
            assert code == 0, err
            outs[m] = msio.read_profile_csv(out)[1]
        assert not np.allclose(outs["mse"], outs["mife"])

    def test_missing_fs_is_exit_2(self, gen_dir, tmp_path, capsys):
        src = os.path.join(gen_dir, "subject_01", "CE", "baseline_1.csv")
        code, _, err = run_cli(
            ["entropy", "--input", src, "--out", str(tmp_path / "p.csv"),
             "--method", "mse", "--scales", "1..2"], capsys)
        assert code == 2
        assert "rate" in err

    def test_constant_input_is_exit_3_with_stage(self, tmp_path, capsys):
        src = str(tmp_path / "flat.csv")
        with open(src, "w") as f:
            f.write("value\n" + "1.0\n" * 400)
        code, _, err = run_cli(
            ["entropy", "--input", src, "--fs", "100",
             "--out", str(tmp_path / "p.csv"), "--method", "mse",
             "--scales", "1..2"], capsys)
        assert code == 3
        assert "degenerate-signal" in err and "stage=" in err

    def test_unknown_method_rejected_by_parser(self, gen_dir, tmp_path):
        src = os.path.join(gen_dir, "subject_01", "CE", "baseline_1.csv")
        with pytest.raises(SystemExit) as exc:
            main(["entropy", "--input", src, "--fs", "100",
                  "--out", str(tmp_path / "p.csv"), "--method", "bogus"])
        assert exc.value.code == 2


class TestConfigLayering:
    def test_config_supplies_defaults_and_flags_win(self, gen_dir, tmp_path,
                                                    capsys):
        src = os.path.join(gen_dir, "subject_01", "CE", "baseline_1.csv")
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"method": "mse", "scales": "1..5",
                                   "fs": 100.0}))
        out1 = str(tmp_path / "a.csv")
        code, _, err = run_cli(
            ["entropy", "--input", src, "--out", out1, "--config", str(cfg)],
            capsys)
        assert code == 0, err
        assert len(msio.read_profile_csv(out1)[0]) == 5
        out2 = str(tmp_path / "b.csv")
        code, _, _ = run_cli(
            ["entropy", "--input", src, "--out", out2, "--config", str(cfg),
             "--scales", "1..2"], capsys)
        assert code == 0
        assert len(msio.read_profile_csv(out2)[0]) == 2

    def test_unknown_config_key_is_exit_2(self, gen_dir, tmp_path, capsys):
        src = os.path.join(gen_dir, "subject_01", "CE", "baseline_1.csv")
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"methd": "mse"}))
        code, _, err = run_cli(
            ["entropy", "--input", src, "--fs", "100",
             "--out", str(tmp_path / "p.csv"), "--config", str(cfg)], capsys)
        assert code == 2
        assert "methd" in err

    def test_config_must_be_json_object(self, gen_dir, tmp_path, capsys):
        src = os.path.join(gen_dir, "subject_01", "CE", "baseline_1.csv")
        cfg = tmp_path / "cfg.json"
        cfg.write_text("[1, 2]")
        code, _, err = run_cli(
            ["entropy", "--input", src, "--fs", "100",
             "--out", str(tmp_path / "p.csv"), "--config", str(cfg)], capsys)
        assert code == 2


EXP_FAST = ["--conditions", "CE:15,OE:20", "--fs", "100", "--stim-dur", "6",
            "--baseline-dur", "6", "--n-stimuli", "3", "--n-baselines", "2",
            "--subjects", "2", "--method", "mse", "--scales", "1..3",
            "--seed", "5"]


class TestCmdExperiment:
    def test_outputs_and_worker_determinism(self, tmp_path, capsys):
        d1, d2 = str(tmp_path / "w1"), str(tmp_path / "w2")
        code, out, err = run_cli(
            ["experiment", "--out", d1, "--workers", "1"] + EXP_FAST, capsys)
        assert code == 0, err
        assert "significant at" in out
        code, _, err = run_cli(
            ["experiment", "--out", d2, "--workers", "2"] + EXP_FAST, capsys)
        assert code == 0, err
        assert file_bytes(os.path.join(d1, "result.json")) == \
            file_bytes(os.path.join(d2, "result.json"))
        names = sorted(os.listdir(d1))
        for expected in ("result.json", "stats.csv", "fig3A.csv", "fig3B.csv",
                         "fig3C.csv", "fig4A.csv", "fig4B.csv", "fig4C.csv"):
            assert expected in names
        d = msio.read_experiment_json(os.path.join(d1, "result.json"))
        assert d["n_subjects"] == 2
        assert d["scales"] == [1, 2, 3]

    def test_stats_command_reproduces_table(self, tmp_path, capsys):
        d = str(tmp_path / "exp")
        code, _, err = run_cli(["experiment", "--out", d] + EXP_FAST, capsys)
        assert code == 0, err
        redo = str(tmp_path / "stats2.csv")
        code, _, err = run_cli(
            ["stats", "--input", os.path.join(d, "result.json"), "--out", redo],
            capsys)
        assert code == 0, err
        assert file_bytes(redo) == file_bytes(os.path.join(d, "stats.csv"))
        header, rows = msio.read_table_csv(redo)
        assert header == ["scale", "test", "statistic", "p_raw", "p_fdr",
                          "reject"]
        # 3 scales x (3 families x 2 conditions x 2 channels + 2 cross)
        assert len(rows) == 3 * (3 * 2 * 2 + 2)

    def test_stats_on_non_result_is_exit_2(self, tmp_path, capsys):
        p = tmp_path / "x.json"
        p.write_text("{}")
        code, _, err = run_cli(
            ["stats", "--input", str(p), "--out", str(tmp_path / "s.csv")],
            capsys)
        assert code == 2


class TestCmdCompare:
    def test_two_methods_tiny_run(self, tmp_path, capsys):
        d = str(tmp_path / "cmp")
        args = ["compare", "--out", d, "--methods", "mse,mfe",
                "--conditions", "CE:15,OE:20", "--fs", "100", "--stim-dur", "5",
                "--baseline-dur", "5", "--n-stimuli", "2", "--n-baselines", "2",
                "--subjects", "2", "--scales", "1..2", "--seed", "5"]
        code, out, err = run_cli(args, capsys)
        assert code == 0, err
        names = sorted(os.listdir(d))
        assert names == ["compare_summary.csv", "result_mfe.json",
                         "result_mse.json"]
        header, rows = msio.read_table_csv(os.path.join(d, "compare_summary.csv"))
        assert header == ["method", "condition", "channel",
                          "tukey_sig_scales", "paired_sig_scales"]
        # 2 methods x 2 conditions x 2 channels
        assert len(rows) == 8

    def test_methods_all_writes_seven_results(self, tmp_path, capsys):
        d = str(tmp_path / "cmp_all")
        args = ["compare", "--out", d, "--methods", "all",
                "--conditions", "CE:15,OE:20", "--fs", "100", "--stim-dur", "5",
                "--baseline-dur", "5", "--n-stimuli", "2", "--n-baselines", "2",
                "--subjects", "2", "--scales", "1..2", "--seed", "5",
                "--band", "1,4"]
        code, _, err = run_cli(args, capsys)
        assert code == 0, err
        results = sorted(n for n in os.listdir(d) if n.startswith("result_"))
        assert results == sorted(f"result_{m}.json" for m in
                                 ("mife", "mde", "mae", "mse", "mfe",
                                  "rmse", "rmfe"))
        _, rows = msio.read_table_csv(os.path.join(d, "compare_summary.csv"))
        assert len(rows) == 7 * 2 * 2

    def test_unknown_method_is_exit_2(self, tmp_path, capsys):
        code, _, err = run_cli(
            ["compare", "--out", str(tmp_path / "c"), "--methods", "mse,nope"],
            capsys)
        assert code == 2
        assert "nope" in err

    def test_experiment_resolved_defaults(self):
        args = build_parser().parse_args(["experiment", "--out", "x"])
        args = _resolve(args, "experiment")
        assert args.subjects == 40
        assert args.scales == "1..20"
        assert args.n_stimuli == 5
        assert len(args.conditions.split(",")) == 2


class TestEntryPoint:
    def test_installed_script_runs(self, tmp_path):
        out = str(tmp_path / "g")
        proc = subprocess.run(
            [sys.executable, "-m", "msentropy", "gen", "--out", out,
             "--subjects", "1", "--seed", "0"] + GEN_FAST,
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert os.path.isdir(os.path.join(out, "subject_01", "CE"))
