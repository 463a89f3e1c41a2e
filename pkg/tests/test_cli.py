import io
import os
from contextlib import redirect_stdout
from pathlib import Path

import pytest

from handpilot.cli import main
from handpilot.crsf import FrameParser, decode_rc_channels

REPO = Path(__file__).resolve().parent.parent
GOLDEN = Path(__file__).resolve().parent / "data" / "golden_track.jsonl"
GOLDEN_SUMMARY = Path(__file__).resolve().parent / "data" / "golden_track.summary.txt"
SAMPLE_UEQ = REPO / "data" / "ueq-sample.csv"


def run_cli(*argv):
    out = io.StringIO()
    with redirect_stdout(out):
        code = main(list(argv))
    return code, out.getvalue()


class TestCrsfCommands:
    def test_gen_outputs_decodable_frame(self):
        code, out = run_cli("crsf", "gen", "--channels", "992,992,172,992")
        assert code == 0
        raw = bytes.fromhex(out.strip().replace(" ", ""))
        assert len(raw) == 26
        frames = FrameParser().feed(raw)
        assert decode_rc_channels(frames[0])[2] == 172

    def test_gen_armed_flag(self):
        code, out = run_cli("crsf", "gen", "--channels", "992,992,172,992", "--armed")
        raw = bytes.fromhex(out.strip().replace(" ", ""))
        assert decode_rc_channels(FrameParser().feed(raw)[0])[4] == 1811

    def test_gen_rejects_bad_count(self, capsys):
        code, _ = run_cli("crsf", "gen", "--channels", "992,992")
        assert code == 1

    def test_inspect_round_trip(self, tmp_path):
        _, out = run_cli("crsf", "gen", "--channels", "1000,1100,500,900")
        capture = tmp_path / "cap.bin"
        capture.write_bytes(b"\x00garbage" + bytes.fromhex(out.strip().replace(" ", "")) + b"\xff")
        code, text = run_cli("crsf", "inspect", str(capture))
        assert code == 0
        assert "type=0x16" in text
        assert "[1000, 1100, 500, 900" in text
        assert "1 frame(s)" in text


class TestMapSimulate:
    def test_rows_map_and_arm(self, tmp_path):
        csv_path = tmp_path / "ctrl.csv"
        csv_path.write_text(
            "timestamp_ms,trigger,tilt_pitch,tilt_roll,thumbstick_x,arm_button\n"
            "0,0,0,0,0,0\n"
            "10,0,0,0,0,1\n"
            "20,1,30,0,0,0\n"
        )
        code, out = run_cli("map", "simulate", "--input", str(csv_path))
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].startswith("t_ms,mode,ch1")
        assert lines[1].split(",")[1] == "disarmed"
        assert lines[2].split(",")[1] == "armed"

    def test_bad_header_fails(self, tmp_path):
        csv_path = tmp_path / "bad.csv"
        csv_path.write_text("a,b\n1,2\n")
        code, _ = run_cli("map", "simulate", "--input", str(csv_path))
        assert code == 1


class TestReplayCommand:
    def test_golden_summary_matches(self):
        code, out = run_cli("replay", str(GOLDEN))
        assert code == 0
        assert out.strip() == GOLDEN_SUMMARY.read_text(encoding="utf-8").strip()

    def test_report_files_written(self, tmp_path):
        os.environ.setdefault("MPLCONFIGDIR", str(tmp_path / "mpl"))
        report = tmp_path / "report"
        code, out = run_cli("replay", str(GOLDEN), "--report-dir", str(report))
        assert code == 0
        for name in ("trajectory_topdown.png", "altitude.png", "channels.png", "rows.csv"):
            assert (report / name).exists(), name
        header = (report / "rows.csv").read_text().splitlines()[0]
        assert header.startswith("t_ms,x,y,z")

    def test_missing_record_fails(self):
        code, _ = run_cli("replay", "/nonexistent/record.jsonl")
        assert code == 1


class TestUeqCommand:
    def test_sample_table(self):
        code, out = run_cli("ueq", "score", str(SAMPLE_UEQ))
        assert code == 0
        assert "2.2 ± 0.8" in out
        assert "2.3 ± 0.9" in out
        assert "n = 10" in out

    def test_report_files(self, tmp_path):
        os.environ.setdefault("MPLCONFIGDIR", str(tmp_path / "mpl"))
        report = tmp_path / "ueq"
        code, _ = run_cli("ueq", "score", str(SAMPLE_UEQ), "--report-dir", str(report))
        assert code == 0
        assert (report / "scales.png").exists()
        assert (report / "scales.csv").exists()

    def test_recode_flag(self, tmp_path):
        raw = tmp_path / "raw.csv"
        raw.write_text(
            "participant,i1,i2,i3,i4,i5,i6,i7,i8\n"
            "a,7,7,7,7,7,7,7,7\n"
            "b,5,5,5,5,5,5,5,5\n"
        )
        code, out = run_cli("ueq", "score", str(raw), "--recode")
        assert code == 0
        assert "2.0 ± 1.4" in out


class TestUsage:
    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            run_cli("replay", "--bogus-flag")
        assert exc.value.code == 2

    def test_no_command_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            run_cli()
        assert exc.value.code == 2


class TestConfigFile:
    def test_default_config_loads(self):
        from handpilot.session import session_config_from_file
        cfg = session_config_from_file(REPO / "configs" / "default.cfg")
        assert cfg.course.name == "paper-track"
        assert cfg.link.packet_rate == 250
        assert cfg.quad.inertia_diag == (2e-5, 2e-5, 3.5e-5)
        assert cfg.ctrl.rate_p == 0.08
        assert cfg.mapping.channel_order == "AETR"
        assert cfg.script_name == "track"

    def test_shipped_course_equals_builtin(self):
        from handpilot.course import default_course, load_course
        assert load_course(REPO / "courses" / "paper-track.json") == default_course()
