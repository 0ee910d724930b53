import json

import numpy as np
import pytest

from memboson.cli import (
    EXIT_CONFIG,
    EXIT_MISSING_FILE,
    EXIT_OK,
    EXIT_USAGE,
    main,
)
from memboson.matrices import load_matrix, unitarity_deviation
from memboson.sampling import Distribution


def run(*args):
    return main(list(args))


class TestBasicCommands:
    def test_gen_unitary(self, tmp_path):
        out = tmp_path / "U.txt"
        assert run("gen-unitary", "--dim", "5", "--seed", "3", "--out", str(out)) == EXIT_OK
        U = load_matrix(out)
        assert U.shape == (5, 5)
        assert unitarity_deviation(U) <= 1e-10
        summary = json.loads((tmp_path / "U.txt.summary.json").read_text())
        assert summary["options"]["seed"] == 3

    def test_distribution_point_mass_on_identity(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        from memboson.matrices import save_matrix

        save_matrix("I.txt", np.eye(3))
        assert run("distribution", "--matrix", "I.txt", "--input", "1-0-1",
                   "--out", "d.csv") == EXIT_OK
        dist = Distribution.load_csv("d.csv")
        lookup = {str(p): pr for p, pr in zip(dist.patterns, dist.probs)}
        assert lookup["1-0-1"] == 1.0

    def test_complexity_headline(self, capsys, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert run("complexity", "--layers", "50000", "--modes", "15",
                   "--fold", "56") == EXIT_OK
        out = capsys.readouterr().out
        assert "254" in out

    def test_sample_and_bench(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        from memboson.matrices import save_matrix

        save_matrix("I.txt", np.eye(2))
        run("distribution", "--matrix", "I.txt", "--input", "1-1", "--out", "d.csv")
        assert run("sample", "--dist", "d.csv", "--count", "10", "--seed", "1",
                   "--out", "s.txt") == EXIT_OK
        assert (tmp_path / "s.txt").read_text().splitlines() == ["1-1"] * 10
        assert run("bench-permanent", "--dims", "2..4:2", "--repeats", "1",
                   "--out", "b.csv") == EXIT_OK
        assert (tmp_path / "b.csv").read_text().startswith("n,method,millis")


class TestErrors:
    def test_missing_file_exit_code(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert run("distribution", "--matrix", "nope.txt", "--input", "1-1",
                   "--out", "d.csv") == EXIT_MISSING_FILE

    def test_invalid_value_exit_code(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert run("gen-unitary", "--dim", "0", "--seed", "1",
                   "--out", "z.txt") == EXIT_CONFIG

    def test_unknown_flag_exit_code(self):
        with pytest.raises(SystemExit) as err:
            run("gen-unitary", "--dim", "2", "--bogus", "1", "--out", "x")
        assert err.value.code == EXIT_USAGE

    def test_machine_readable_error_line(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        run("distribution", "--matrix", "nope.txt", "--input", "1-1", "--out", "d.csv")
        doc = json.loads(capsys.readouterr().err.strip())
        assert doc["type"] == "missing-file"

    def test_unknown_config_key(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        (tmp_path / "c.cfg").write_text("nonsense=1\n")
        assert run("gen-unitary", "--config", "c.cfg", "--dim", "2",
                   "--out", "u.txt") == EXIT_CONFIG


class TestConfigFile:
    def test_config_supplies_required_options(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        (tmp_path / "c.cfg").write_text("dim=4\nseed=9\nout=U.txt\n")
        assert run("gen-unitary", "--config", "c.cfg") == EXIT_OK
        assert load_matrix("U.txt").shape == (4, 4)

    def test_flags_override_config(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        (tmp_path / "c.cfg").write_text("dim=4\nout=U.txt\n")
        assert run("gen-unitary", "--config", "c.cfg", "--dim", "6") == EXIT_OK
        assert load_matrix("U.txt").shape == (6, 6)

    def test_extraction_parameters_from_config(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        run("build-net", "--modes", "4", "--layers", "2", "--transition", "0.5",
            "--seed", "11", "--out", "net.txt")
        run("distribution", "--matrix", "net.txt", "--input", "1-1-0-0-0-0-0-0",
            "--collision-free", "--out", "dist.csv")
        run("gen-events", "--modes", "4", "--layers", "2", "--transition", "0.5",
            "--net-seed", "11", "--input", "1-1-0-0-0-0-0-0", "--dist", "dist.csv",
            "--duration-pulses", "3000", "--seed", "5", "--firing-probability",
            "0.5", "--out", "stream.mbs")
        run("calibrate", "--stream", "stream.mbs", "--out", "table.json")
        (tmp_path / "extract.cfg").write_text(
            "window_ns=2.0\ngather_ns=21.0\nsection_shift_ns=12.5\n"
            "fold=2\nlayers=2\nmodes=4\n"
        )
        assert run("extract", "--config", "extract.cfg", "--stream", "stream.mbs",
                   "--table", "table.json", "--out", "events.csv") == EXIT_OK
        assert (tmp_path / "events.csv").read_text().count("\n") > 500


class TestEndToEndAndReplay:
    def test_pipeline_chain_and_byte_identical_replay(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert run("build-net", "--modes", "4", "--layers", "2", "--transition",
                   "0.5", "--seed", "11", "--out", "net.txt",
                   "--graph-edges", "g.txt") == EXIT_OK
        assert run("distribution", "--matrix", "net.txt", "--input",
                   "1-1-0-0-0-0-0-0", "--collision-free", "--out",
                   "dist.csv") == EXIT_OK
        gen_args = (
            "gen-events", "--modes", "4", "--layers", "2", "--transition", "0.5",
            "--net-seed", "11", "--input", "1-1-0-0-0-0-0-0", "--dist", "dist.csv",
            "--duration-pulses", "6000", "--seed", "5", "--firing-probability",
            "0.5", "--out", "stream.mbs",
        )
        assert run(*gen_args) == EXIT_OK
        assert run("calibrate", "--stream", "stream.mbs", "--out",
                   "table.json") == EXIT_OK
        extract_args = (
            "extract", "--stream", "stream.mbs", "--table", "table.json",
            "--fold", "2", "--layers", "2", "--modes", "4", "--workers", "2",
            "--out", "events.csv",
        )
        assert run(*extract_args) == EXIT_OK
        assert run("reconstruct", "--events", "events.csv", "--total-modes", "8",
                   "--estimator", "counts", "--out", "rec.csv") == EXIT_OK
        assert run("fidelity", "--dist-a", "rec.csv", "--dist-b",
                   "dist.csv") == EXIT_OK
        assert run("validate", "--events", "events.csv", "--p-ind", "dist.csv",
                   "--q-dis", "dist.csv", "--total-modes", "8", "--out",
                   "trace.csv") == EXIT_OK

        # identical trace => counter pinned at zero
        lines = (tmp_path / "trace.csv").read_text().splitlines()
        assert lines[-1].endswith(",0")

        # byte-identical replay of every CSV-producing step
        events_bytes = (tmp_path / "events.csv").read_bytes()
        stream_bytes = (tmp_path / "stream.mbs").read_bytes()
        run(*gen_args)
        run(*extract_args)
        assert (tmp_path / "stream.mbs").read_bytes() == stream_bytes
        assert (tmp_path / "events.csv").read_bytes() == events_bytes

    def test_scaling_command(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        run("build-net", "--modes", "4", "--layers", "2", "--transition", "0.0",
            "--seed", "1", "--out", "net.txt")
        run("distribution", "--matrix", "net.txt", "--input", "1-1-0-0-0-0-0-0",
            "--collision-free", "--out", "dist.csv")
        run("gen-events", "--modes", "4", "--layers", "2", "--transition", "0.0",
            "--net-seed", "1", "--input", "1-1-0-0-0-0-0-0", "--dist", "dist.csv",
            "--duration-pulses", "4000", "--seed", "2", "--firing-probability",
            "0.5", "--out", "s.mbs")
        assert run("scaling", "--stream", "s.mbs", "--modes", "4",
                   "--layer-values", "2", "--fold-values", "2",
                   "--partitions", "4", "--out", "sc.csv") == EXIT_OK
        header, row = (tmp_path / "sc.csv").read_text().splitlines()
        assert header == "layers,fold,mean,std,counts"
        assert row.startswith("2,2,")
