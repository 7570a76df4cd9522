import json

import pytest

from sinusim.cli import main
from tests.conftest import straight_line_samples


@pytest.fixture
def traj_file(tmp_path):
    path = tmp_path / "traj.txt"
    lines = [f"{t} {p[0]} {p[1]} {p[2]}"
             for t, p in straight_line_samples(duration=31.0, rate_hz=100.0)]
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def session_log(tmp_path, traj_file):
    out = tmp_path / "s.log"
    code = main(["run", "--task", "evaluation", "--level", "3",
                 "--seed", "7", "--input", str(traj_file),
                 "--out", str(out)])
    assert code == 0
    return out


class TestCli:
    def test_run_writes_log(self, session_log):
        assert session_log.exists()
        assert session_log.read_text().startswith("#SINUSLOG v1\n")

    def test_metrics_prints_json(self, session_log, capsys):
        assert main(["metrics", str(session_log)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["outcome"] == "success"
        assert out["completion_time_s"] > 0

    def test_metrics_series_files(self, session_log, tmp_path, capsys):
        prefix = str(tmp_path / "series")
        assert main(["metrics", str(session_log), "--series", prefix]) == 0
        assert (tmp_path / "series_force.tsv").exists()
        assert (tmp_path / "series_distance.tsv").exists()

    def test_replay_ok(self, session_log, capsys):
        assert main(["replay", str(session_log)]) == 0
        assert "bit-exactly" in capsys.readouterr().out

    def test_replay_tampered_nonzero(self, session_log, tmp_path, capsys):
        lines = session_log.read_text().splitlines()
        parts = lines[5000].split()
        parts[7] = repr(float(parts[7]) + 1.0)
        lines[5000] = " ".join(parts)
        bad = tmp_path / "tampered.log"
        bad.write_text("\n".join(lines) + "\n")
        assert main(["replay", str(bad)]) == 5
        assert "tick" in capsys.readouterr().err

    def test_report(self, session_log, tmp_path, capsys):
        qpath = tmp_path / "q.json"
        qpath.write_text(json.dumps({
            "How users will sense the fracture during the operation":
                [7, 8, 9]}))
        out = tmp_path / "report.json"
        code = main(["report", str(session_log), str(session_log),
                     "--label", "group-i", "--questionnaire", str(qpath),
                     "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["n_sessions"] == 2
        assert doc["outcome_percentages"]["success"] == 100.0

    def test_fit_lpv(self, session_log, capsys):
        assert main(["fit-lpv", str(session_log)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert "a0" in doc and "b" in doc

    def test_scene_check(self, capsys):
        assert main(["scene-check"]) == 0
        assert "free -> floor -> goal" in capsys.readouterr().out

    def test_unknown_flag_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--bogus"])
        assert exc.value.code == 2

    def test_missing_log_io_error(self):
        assert main(["metrics", "/nonexistent/file.log"]) == 4

    def test_bad_config_exit_code(self, tmp_path, traj_file):
        cfg = tmp_path / "bad.yaml"
        cfg.write_text("loop:\n  tick_rate: -1\n")
        assert main(["run", "--config", str(cfg), "--input",
                     str(traj_file)]) == 3

    def test_config_file_round_trip(self, tmp_path, traj_file):
        cfg = tmp_path / "cfg.yaml"
        cfg.write_text("loop:\n  force_max: 2.5\nsession:\n  timeout: 60\n")
        out = tmp_path / "s.log"
        assert main(["run", "--config", str(cfg), "--level", "2",
                     "--input", str(traj_file), "--out", str(out)]) == 0
        header = json.loads(out.read_text().splitlines()[1][len("#HEADER "):])
        assert header["config"]["loop"]["force_max"] == 2.5
        assert header["task"]["sigma"] == 0.75
