import shutil
from pathlib import Path

import pytest

from ntn_harq.cli import main

PROFILES = Path(__file__).resolve().parent.parent / "profiles"
LTEM = PROFILES / "leo600_ltem_ul.cfg"


@pytest.fixture
def ltem_copy(tmp_path):
    dest = tmp_path / "leo600_ltem_ul.cfg"
    shutil.copy(LTEM, dest)
    return dest


def run_cli(*args):
    return main([str(a) for a in args])


def test_run_emits_csv(tmp_path, capsys):
    out = tmp_path / "row.csv"
    assert run_cli("run", LTEM, "--out", out) == 0
    text = out.read_text()
    lines = text.splitlines()
    assert lines[0].startswith("scenario_id,altitude_km")
    assert len(lines) == 2
    assert ",proposed," in lines[1]


def test_run_byte_identical_across_invocations(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli("run", LTEM, "--out", a) == 0
    assert run_cli("run", LTEM, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()


def test_run_with_monte_carlo(tmp_path, ltem_copy):
    (ltem_copy).write_text(
        ltem_copy.read_text()
        + "monte_carlo.n_cycles = 200\nmonte_carlo.seed = 5\n"
        + "monte_carlo.bler_per_attempt = 0.1,0\n"
    )
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli("run", ltem_copy, "--out", out_a) == 0
    assert run_cli("run", ltem_copy, "--out", out_b) == 0
    assert "# monte_carlo goodput_bps=" in out_a.read_text()
    assert out_a.read_bytes() == out_b.read_bytes()


def test_run_missing_file_is_config_error(tmp_path):
    assert run_cli("run", tmp_path / "nope.cfg") == 3


def test_run_infeasible_link_exit_code(tmp_path, ltem_copy):
    ltem_copy.write_text(ltem_copy.read_text() + "link.eirp_dbm = -40\n")
    assert run_cli("run", ltem_copy) == 2


def test_run_bad_key_exit_code(tmp_path, ltem_copy):
    ltem_copy.write_text(ltem_copy.read_text() + "cycle.bogus = 1\n")
    assert run_cli("run", ltem_copy) == 3


def test_sweep_rows_and_determinism(tmp_path):
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = [
        "sweep", LTEM,
        "--axis", "geometry.altitude_km=600,1200",
        "--axis", "mode=legacy,proposed",
    ]
    assert run_cli(*args, "--out", out_a) == 0
    assert run_cli(*args, "--out", out_b) == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    lines = out_a.read_text().splitlines()
    assert len(lines) == 5  # header + 4 combinations


def test_sweep_bad_axis(tmp_path):
    assert run_cli("sweep", LTEM, "--axis", "nonsense=1,2") == 3


def test_timeline_text_ue(capsys):
    assert run_cli("timeline", LTEM, "--perspective", "ue") == 0
    text = capsys.readouterr().out
    assert text.splitlines()[0].startswith("sf")
    for row in ("PDCCH", "PUSCH", "switch"):
        assert row in text


def test_timeline_bs_matches_ue_when_rendered(capsys):
    assert run_cli("timeline", LTEM, "--perspective", "bs") == 0
    text = capsys.readouterr().out
    assert "PUSCH" in text


def test_timeline_svg(tmp_path):
    out = tmp_path / "cycle.svg"
    assert run_cli("timeline", LTEM, "--format", "svg", "--out", out) == 0
    svg = out.read_text()
    assert svg.startswith("<svg")
    assert "<rect" in svg


def test_timeline_legacy_conflict_annotated(tmp_path, capsys):
    # small blocks keep the grid readable; four repetitions against a
    # three-SF fixed delay puts TB 1's feedback on TB 2's last data SF
    config = tmp_path / "overlap.cfg"
    # TBS 144 at the LEO600 operating point selects 4 repetitions,
    # exceeding the 3-SF fixed delay
    config.write_text("direction = dl\nmode = legacy\ncycle.n_tbphc = 2\ntbs_bits = 144\n")
    assert run_cli("timeline", config) == 0
    text = capsys.readouterr().out
    assert "! double-booking" in text
    assert "RxPDSCH / TxPUCCH" in text


def test_timeline_legacy_multi_tb_config_cannot_run(tmp_path):
    config = tmp_path / "overlap.cfg"
    config.write_text("direction = dl\nmode = legacy\ncycle.n_tbphc = 2\n")
    assert run_cli("run", config) == 3


def test_timeline_csv_export_format(tmp_path):
    out = tmp_path / "cycle.csv"
    assert run_cli("timeline", LTEM, "--format", "csv", "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "0,UE,RxPDCCH,1,1"
    assert all(line.count(",") == 4 for line in lines)


def test_timeline_eight_subframe_ul_cycle():
    # a one-TB uplink cycle squeezed into eight subframes:
    # grant 1 + wait 3 + data 3 + switch 1
    from ntn_harq.cli import render_timeline_text
    from ntn_harq.harq import CycleParams, Direction
    from ntn_harq.scheduler import build_legacy_cycle

    params = CycleParams(n_tbphc=1, rep_pdcch=1, rep_pusch=3, ug2d_min=3, n_switch=1)
    timeline = build_legacy_cycle(params, Direction.UL)
    assert len(timeline) == 8
    header = render_timeline_text(timeline).splitlines()[0]
    assert header.split()[-1] == "7"  # columns 0..7


def test_calibrate_dry_run_keeps_file(tmp_path, ltem_copy, capsys):
    before = ltem_copy.read_bytes()
    assert run_cli("calibrate", ltem_copy, "--dry-run") == 0
    out = capsys.readouterr().out
    assert "rep_pdcch=1 n_a2g=0" in out
    assert ltem_copy.read_bytes() == before


def test_calibrate_writes_pair(tmp_path, ltem_copy):
    assert run_cli("calibrate", ltem_copy) == 0
    text = ltem_copy.read_text()
    assert "cycle.rep_pdcch = 1" in text
    assert "cycle.n_a2g = 0" in text
    # written profile still runs
    assert run_cli("run", ltem_copy) == 0
