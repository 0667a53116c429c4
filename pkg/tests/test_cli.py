import pytest

from commscore.cli import main, parse_grid

from conftest import G1_EDGES


@pytest.fixture
def files(tmp_path):
    g = tmp_path / "g1.txt"
    g.write_text("# fixture\n" + "".join(f"{u}\t{v}\n" for u, v in G1_EDGES))
    c = tmp_path / "c.txt"
    c.write_text("0 1 2\n3 4 5\n0 1 2 3\n")
    return g, c


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_score(files, capsys):
    g, c = files
    code, out, _ = run(capsys, "score", "--graph", g, "--communities", c, "--scores", "conductance,tpr")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "community\tsize\tconductance\ttpr"
    assert lines[1].split("\t")[2:] == [repr(1 / 7), "1.0"]
    assert len(lines) == 4


def test_detect(files, capsys):
    g, _ = files
    code, out, _ = run(capsys, "detect", "--graph", g, "--seed", 0, "--score", "conductance")
    assert (code, out) == (0, "0 1 2\n")


def test_detect_curve(files, capsys, tmp_path):
    g, _ = files
    curve = tmp_path / "curve.tsv"
    code, _, _ = run(capsys, "detect", "--graph", g, "--seed", 0, "--curve", curve)
    assert code == 0
    rows = curve.read_text().splitlines()
    assert rows[0] == "k\tnode\tconductance"
    assert [float(r.split("\t")[2]) for r in rows[1:]][:3] == [1.0, 0.5, 1 / 7]


def test_perturb_grid(files, capsys):
    g, c = files
    code, out, _ = run(
        capsys, "perturb", "--graph", g, "--communities", c, "--score", "conductance",
        "--strategy", "nodeswap", "--grid", "0.01:0.6:12", "--trials", 2,
    )
    assert code == 0
    assert len(out.splitlines()) == 13


def test_parse_grid():
    assert parse_grid("0.1:0.5:5") == pytest.approx([0.1, 0.2, 0.3, 0.4, 0.5])
    assert len(parse_grid("0.01:0.6:12")) == 12


def test_goodness_writes_inf(files, capsys, tmp_path):
    g, _ = files
    c = tmp_path / "whole.txt"
    c.write_text("0 1 2 3 4 5\n")
    code, out, _ = run(capsys, "goodness", "--graph", g, "--communities", c, "--metrics", "separability")
    assert code == 0
    assert out.splitlines()[1].endswith("\tinf")


def test_rank_outputs(files, capsys, tmp_path):
    g, c = files
    out_dir = tmp_path / "rank"
    code, _, _ = run(capsys, "rank", "--graph", g, "--communities", c, "--out-dir", out_dir)
    assert code == 0
    names = sorted(p.name for p in out_dir.iterdir())
    assert names == ["avg_rank.tsv", "rank_ccf.tsv", "rank_cohesiveness.tsv", "rank_density.tsv", "rank_separability.tsv"]
    header = (out_dir / "rank_density.tsv").read_text().splitlines()[0].split("\t")
    assert header[:2] == ["k", "U"]


def test_correlate(files, capsys):
    g, c = files
    code, out, _ = run(capsys, "correlate", "--graph", g, "--communities", c, "--scores", "conductance,expansion")
    assert code == 0
    assert "group\tscores" in out


def test_synth_and_eval_seed_round_trip(capsys, tmp_path):
    g, c = tmp_path / "g.txt", tmp_path / "c.txt"
    code, _, _ = run(
        capsys, "synth", "--communities", 4, "--size", 6, "--p-in", 1.0, "--p-out", 0.0,
        "--out-graph", g, "--out-communities", c,
    )
    assert code == 0
    code, out, _ = run(capsys, "eval-seed", "--graph", g, "--communities", c, "--samples", 4)
    assert code == 0
    last = out.splitlines()[-1].split("\t")
    assert last[0] == "mean" and float(last[5]) == 1.0
    code, out, _ = run(capsys, "eval-seed", "--graph", g, "--communities", c, "--samples", 4, "--all")
    assert float(out.splitlines()[-1].split("\t")[5]) == 1.0


def test_stats(files, capsys):
    g, c = files
    code, out, _ = run(capsys, "stats", "--graph", g)
    assert code == 0 and "edges\t7" in out
    code, out, _ = run(capsys, "stats", "--graph", g, "--communities", c)
    assert out.splitlines()[1].split("\t")[1:] == ["3", "3", "1", "7"]


def test_exit_codes(files, capsys, tmp_path):
    g, c = files
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    assert run(capsys, "score", "--graph", g, "--communities", c, "--scores", "bogus")[0] == 2
    assert run(capsys, "score", "--graph", tmp_path / "missing", "--communities", c)[0] == 1
    bad = tmp_path / "bad.txt"
    bad.write_text("0 x\n")
    code, _, err = run(capsys, "stats", "--graph", bad)
    assert code == 1 and "line 1" in err


def test_threads_env(files, capsys, monkeypatch):
    g, c = files
    monkeypatch.setenv("COMMSCORE_THREADS", "3")
    code, out, _ = run(capsys, "score", "--graph", g, "--communities", c)
    assert code == 0
