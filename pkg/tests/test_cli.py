"""Command-line front end: formats, exit codes, artifacts."""

import json

import numpy as np
import pytest

from eqpt.benchmark import CellSummary
from eqpt.cli import (
    CSV_HEADER,
    ConfigFormatError,
    MatrixFormatError,
    format_csv,
    format_svg,
    main,
    parse_config_file,
    read_matrix_file,
    write_manifest,
    write_matrix_file,
)
from eqpt.linalg import random_unitary


@pytest.fixture(autouse=True)
def _no_seed_env(monkeypatch):
    monkeypatch.delenv("EQPT_SEED", raising=False)


def mask_time(csv_text):
    """Blank the wall-time column, the only nondeterministic field."""
    lines = csv_text.splitlines()
    out = [lines[0]]
    for line in lines[1:]:
        fields = line.split(",")
        assert np.isfinite(float(fields[-1]))
        out.append(",".join(fields[:-1] + ["T"]))
    return "\n".join(out)


class TestMatrixFiles:
    def test_round_trip_bit_for_bit(self, tmp_path):
        u = random_unitary(4, 3, complex_entries=True)
        path = tmp_path / "u.txt"
        write_matrix_file(path, u)
        assert np.array_equal(read_matrix_file(path), u)

    def test_comment_and_blank_lines_skipped(self, tmp_path):
        u = random_unitary(2, 1)
        path = tmp_path / "u.txt"
        write_matrix_file(path, u)
        with open(path, "a") as fh:
            fh.write("\n# method eqpt1\n# nrmse 0\n")
        assert np.array_equal(read_matrix_file(path), u)

    def test_rejects_bad_dimension_line(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("four\n")
        with pytest.raises(MatrixFormatError, match=":1:"):
            read_matrix_file(path)

    def test_rejects_short_entry_line(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1\n1 1 0.5\n")
        with pytest.raises(MatrixFormatError, match=":2:"):
            read_matrix_file(path)

    def test_rejects_duplicate_entry(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1\n1 1 1 0\n1 1 1 0\n")
        with pytest.raises(MatrixFormatError, match="duplicate"):
            read_matrix_file(path)

    def test_rejects_out_of_range_index(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1\n2 1 1 0\n")
        with pytest.raises(MatrixFormatError, match="outside"):
            read_matrix_file(path)

    def test_rejects_missing_entries(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("2\n1 1 1 0\n")
        with pytest.raises(MatrixFormatError, match="expected 4 entries"):
            read_matrix_file(path)

    def test_rejects_non_square_write(self, tmp_path):
        with pytest.raises(ValueError):
            write_matrix_file(tmp_path / "x.txt", np.ones((2, 3)))


class TestCsv:
    def test_header(self):
        assert CSV_HEADER == (
            "method,qubits,dimension,width,trials,mean_nrmse,std_nrmse,mean_time_s"
        )

    def test_row_formatting_ten_significant_digits(self):
        cell = CellSummary(
            method="eqpt1",
            qubits=2,
            dimension=4,
            width=1e-3,
            trials=5,
            mean_nrmse=1 / 3,
            std_nrmse=0.25,
            mean_time_s=0.0001,
            p90_time_s=0.1,
        )
        text = format_csv([cell])
        assert text == CSV_HEADER + "\neqpt1,2,4,0.001,5,0.3333333333,0.25,0.0001\n"

    def test_locale_independent_fields(self):
        cell = CellSummary("eqpt2", 4, 16, 0.01, 3, 1.5e-2, 2.5e-3, 0.75, 0.9)
        for line in format_csv([cell]).splitlines():
            assert len(line.split(",")) == 8
            assert " " not in line


class TestSvg:
    def _cells(self):
        out = []
        for method in ("eqpt1", "eqpt2"):
            for w in (1e-4, 1e-3):
                for q in (2, 4, 6):
                    out.append(
                        CellSummary(method, q, 2**q, w, 5, 10 ** (-4 + q / 2) * w, 0, 0, 0)
                    )
        return out

    def test_structure_and_series_count(self):
        svg = format_svg(self._cells())
        assert svg.startswith("<svg ")
        assert svg.rstrip().endswith("</svg>")
        assert svg.count("<polyline ") == 4  # one per (method, width)
        assert "qubits" in svg and "log10(mean NRMSE)" in svg

    def test_deterministic(self):
        assert format_svg(self._cells()) == format_svg(self._cells())

    def test_zero_error_cells_plottable(self):
        cells = [CellSummary("eqpt1", q, 2**q, 0.0, 5, 0.0, 0, 0, 0) for q in (2, 4)]
        svg = format_svg(cells)
        assert "nan" not in svg and "inf" not in svg


class TestManifest:
    def test_written_next_to_artifact(self, tmp_path):
        artifact = tmp_path / "out.csv"
        artifact.write_text("x\n")
        path = write_manifest(artifact, "bench", {"trials": 3}, 7, extra={"k": 1})
        assert path == str(artifact) + ".manifest.json"
        data = json.loads(open(path).read())
        assert data["command"] == "bench"
        assert data["config"] == {"trials": 3}
        assert data["base_seed"] == 7
        assert data["k"] == 1
        assert "timestamp" in data and "tool_version" in data


class TestConfigFile:
    def test_parses_full_file(self, tmp_path):
        path = tmp_path / "sweep.cfg"
        path.write_text(
            "# benchmark grid\n"
            "methods = eqpt1, eqpt2\n"
            "qubits = 2, 4\n"
            "widths = 0, 1e-3\n"
            "trials = 7\n"
            "base_seed = 3\n"
            "jobs = 2  # worker count\n"
        )
        cfg = parse_config_file(path)
        assert cfg == {
            "methods": ("eqpt1", "eqpt2"),
            "qubits": (2, 4),
            "widths": (0.0, 1e-3),
            "trials": 7,
            "base_seed": 3,
            "jobs": 2,
        }

    def test_rejects_unknown_key(self, tmp_path):
        path = tmp_path / "sweep.cfg"
        path.write_text("method = eqpt1\n")
        with pytest.raises(ConfigFormatError, match="unknown key"):
            parse_config_file(path)

    def test_rejects_missing_equals(self, tmp_path):
        path = tmp_path / "sweep.cfg"
        path.write_text("methods eqpt1\n")
        with pytest.raises(ConfigFormatError, match=":1:"):
            parse_config_file(path)

    def test_rejects_bad_value(self, tmp_path):
        path = tmp_path / "sweep.cfg"
        path.write_text("qubits = two\n")
        with pytest.raises(ConfigFormatError):
            parse_config_file(path)


class TestEstimateCommand:
    def test_noiseless_run_writes_result_and_manifest(self, tmp_path, capsys):
        out = tmp_path / "uhat.txt"
        code = main(
            [
                "estimate",
                "--method",
                "eqpt1",
                "--qubits",
                "3",
                "--width",
                "0",
                "--seed",
                "5",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        u_hat = read_matrix_file(out)
        assert u_hat.shape == (8, 8)
        assert np.linalg.norm(u_hat.conj().T @ u_hat - np.eye(8)) < 1e-8
        manifest = json.loads(open(str(out) + ".manifest.json").read())
        assert manifest["nrmse"] < 1e-10
        assert "# nrmse" in out.read_text()
        assert "nrmse=" in capsys.readouterr().out

    def test_odd_qubits_for_two_stage_is_usage_error(self, tmp_path, capsys):
        code = main(
            ["estimate", "--method", "eqpt2", "--qubits", "3", "--out", str(tmp_path / "o")]
        )
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_matrix_file_input(self, tmp_path):
        u = random_unitary(4, 8)
        src = tmp_path / "u.txt"
        write_matrix_file(src, u)
        out = tmp_path / "uhat.txt"
        code = main(
            ["estimate", "--method", "eqpt1", "--matrix-file", str(src), "--out", str(out)]
        )
        assert code == 0
        manifest = json.loads(open(str(out) + ".manifest.json").read())
        assert manifest["nrmse"] < 1e-10

    def test_matrix_file_qubits_conflict(self, tmp_path, capsys):
        src = tmp_path / "u.txt"
        write_matrix_file(src, random_unitary(4, 8))
        code = main(
            [
                "estimate",
                "--method",
                "eqpt1",
                "--matrix-file",
                str(src),
                "--qubits",
                "3",
                "--out",
                str(tmp_path / "o"),
            ]
        )
        assert code == 2
        capsys.readouterr()

    def test_non_power_of_two_matrix(self, tmp_path, capsys):
        src = tmp_path / "u.txt"
        write_matrix_file(src, random_unitary(3, 1))
        code = main(
            ["estimate", "--method", "eqpt1", "--matrix-file", str(src), "--out", str(tmp_path / "o")]
        )
        assert code == 2
        capsys.readouterr()

    def test_malformed_matrix_file_is_parse_error(self, tmp_path, capsys):
        src = tmp_path / "u.txt"
        src.write_text("2\n1 1 zero 0\n")
        code = main(
            ["estimate", "--method", "eqpt1", "--matrix-file", str(src), "--out", str(tmp_path / "o")]
        )
        assert code == 3
        assert "error" in capsys.readouterr().err

    def test_missing_matrix_file_is_io_error(self, tmp_path, capsys):
        code = main(
            [
                "estimate",
                "--method",
                "eqpt1",
                "--matrix-file",
                str(tmp_path / "absent.txt"),
                "--out",
                str(tmp_path / "o"),
            ]
        )
        assert code == 5
        capsys.readouterr()

    def test_unknown_method_rejected_by_parser(self, tmp_path, capsys):
        code = main(["estimate", "--method", "eqpt9", "--qubits", "2"])
        assert code == 2
        capsys.readouterr()

    def test_seed_env_override(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("EQPT_SEED", "123")
        out = tmp_path / "uhat.txt"
        code = main(
            ["estimate", "--method", "eqpt1", "--qubits", "2", "--seed", "9", "--out", str(out)]
        )
        assert code == 0
        manifest = json.loads(open(str(out) + ".manifest.json").read())
        assert manifest["base_seed"] == 123
        assert manifest["config"]["seed"] == 123
        capsys.readouterr()


class TestBenchCommand:
    def _run(self, tmp_path, extra=(), name="b.csv"):
        csv_path = tmp_path / name
        args = [
            "bench",
            "--methods",
            "eqpt1",
            "--qubits",
            "2",
            "--widths",
            "1e-3",
            "--trials",
            "3",
            "--csv",
            str(csv_path),
        ] + list(extra)
        assert main(args) == 0
        return csv_path.read_text()

    def test_single_cell_csv(self, tmp_path, capsys):
        text = self._run(tmp_path)
        lines = text.splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 2
        assert lines[1].startswith("eqpt1,2,4,0.001,3,")
        capsys.readouterr()

    def test_rerun_reproducible(self, tmp_path, capsys):
        a = self._run(tmp_path, name="a.csv")
        b = self._run(tmp_path, name="b.csv")
        assert mask_time(a) == mask_time(b)
        capsys.readouterr()

    def test_jobs_do_not_change_results(self, tmp_path, capsys):
        a = self._run(tmp_path, name="a.csv")
        b = self._run(tmp_path, extra=["--jobs", "4"], name="b.csv")
        assert mask_time(a) == mask_time(b)
        capsys.readouterr()

    def test_config_file_run_with_svg(self, tmp_path, capsys):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text("methods = eqpt1\nqubits = 1, 2\nwidths = 1e-3\ntrials = 2\n")
        csv_path = tmp_path / "out.csv"
        svg_path = tmp_path / "out.svg"
        code = main(
            ["bench", "--config", str(cfg), "--csv", str(csv_path), "--svg", str(svg_path)]
        )
        assert code == 0
        assert len(csv_path.read_text().splitlines()) == 3
        svg = svg_path.read_text()
        assert svg.startswith("<svg ") and svg.rstrip().endswith("</svg>")
        assert (tmp_path / "out.csv.manifest.json").exists()
        assert (tmp_path / "out.svg.manifest.json").exists()
        capsys.readouterr()

    def test_flag_overrides_config(self, tmp_path, capsys):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text("methods = eqpt2\nqubits = 2\ntrials = 2\nwidths = 1e-3\n")
        csv_path = tmp_path / "out.csv"
        code = main(
            ["bench", "--config", str(cfg), "--methods", "eqpt1", "--csv", str(csv_path)]
        )
        assert code == 0
        assert "eqpt1," in csv_path.read_text()
        assert "eqpt2," not in csv_path.read_text()
        capsys.readouterr()

    def test_missing_grid_is_usage_error(self, tmp_path, capsys):
        assert main(["bench", "--csv", str(tmp_path / "x.csv")]) == 2
        capsys.readouterr()

    def test_oversized_dichotomic_sweep_rejected(self, tmp_path, capsys):
        code = main(
            [
                "bench",
                "--methods",
                "eqpt5",
                "--qubits",
                "12",
                "--csv",
                str(tmp_path / "x.csv"),
            ]
        )
        assert code == 2
        capsys.readouterr()

    def test_unwritable_csv_is_io_error(self, tmp_path, capsys):
        code = main(
            [
                "bench",
                "--methods",
                "eqpt1",
                "--qubits",
                "1",
                "--widths",
                "0",
                "--trials",
                "1",
                "--csv",
                str(tmp_path / "missing-dir" / "x.csv"),
            ]
        )
        assert code == 5
        capsys.readouterr()


class TestDemoCommand:
    def test_demo_passes_self_checks(self, capsys):
        code = main(["demo", "--jobs", "1"])
        out = capsys.readouterr().out
        assert code == 0
        data_rows = [l for l in out.splitlines() if l.startswith("eqpt")]
        assert len(data_rows) == 12  # 3 methods x 2 qubit counts x 2 widths
        assert "noiseless cells recovered below 1e-8 as required" in out
        assert "two-stage improves on single-stage" in out


class TestEntryPoint:
    def test_version_flag(self, capsys):
        assert main(["--version"]) == 0
        capsys.readouterr()

    def test_no_command_is_usage_error(self, capsys):
        assert main([]) == 2
        capsys.readouterr()
