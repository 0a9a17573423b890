import pytest

from trackletcut.cli import main

SYNTH = """\
n_identities = 3
n_frames = 25
occlusions = 2:8-10
rng_seed = 4
"""


@pytest.fixture
def synth_files(tmp_path):
    cfg = tmp_path / "synth.cfg"
    cfg.write_text(SYNTH)
    paths = {k: tmp_path / f"{k}.txt" for k in ("det", "gt")}
    paths["seqinfo"] = tmp_path / "seqinfo.ini"
    assert main(["synth", "--config", str(cfg), "--out-det", str(paths["det"]),
                 "--out-gt", str(paths["gt"]), "--out-seqinfo", str(paths["seqinfo"])]) == 0
    return paths


def test_synth_track_eval(synth_files, tmp_path, capsys):
    out, hist = tmp_path / "tracks.txt", tmp_path / "hist.csv"
    args = ["track", "--det", str(synth_files["det"]), "--seqinfo", str(synth_files["seqinfo"]),
            "--scorer", "oracle", "--gt", str(synth_files["gt"]), "--out", str(out), "--history", str(hist)]
    assert main(args) == 0
    assert hist.read_text().startswith("iteration,phase,")
    assert main(["eval", "--pred", str(out), "--gt", str(synth_files["gt"])]) == 0
    assert "MOTA=1.0000" in capsys.readouterr().out


def test_stats_then_gated_baseline(synth_files, tmp_path):
    stats = tmp_path / "stats.txt"
    assert main(["stats", "--gt", str(synth_files["gt"]), "--seqinfo", str(synth_files["seqinfo"]),
                 "--out", str(stats)]) == 0
    assert stats.read_text().splitlines()[0].startswith("static ")
    out = tmp_path / "tracks.txt"
    assert main(["track", "--det", str(synth_files["det"]), "--seqinfo", str(synth_files["seqinfo"]),
                 "--stats", str(stats), "--out", str(out)]) == 0
    assert out.read_text()


def test_samples(synth_files, tmp_path, capsys):
    out = tmp_path / "s.jsonl"
    assert main(["samples", "--gt", str(synth_files["gt"]), "--n", "50", "--seed", "1",
                 "--out", str(out), "--seqinfo", str(synth_files["seqinfo"])]) == 0
    assert len(out.read_text().splitlines()) == 50
    assert "positive=" in capsys.readouterr().out


def test_solve(tmp_path, capsys):
    g = tmp_path / "g.txt"
    g.write_text("p mc 3 2 1\ne 0 2 0.8472978603872037\ne 1 2 2.1972245773362196\nc 0 1\n")
    assert main(["solve", "--graph", str(g)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[:3] == ["0 0", "1 1", "2 1"]
    assert lines[3].startswith("objective 0.84729786")


def test_oracle_needs_gt(synth_files, tmp_path):
    with pytest.raises(SystemExit):
        main(["track", "--det", str(synth_files["det"]), "--seqinfo", str(synth_files["seqinfo"]),
              "--scorer", "oracle", "--out", str(tmp_path / "x.txt")])


def test_bad_input_reports_error(tmp_path, capsys):
    g = tmp_path / "g.txt"
    g.write_text("garbage\n")
    assert main(["solve", "--graph", str(g)]) == 2
    assert "error:" in capsys.readouterr().err
