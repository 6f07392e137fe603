import csv

import pytest

from pade3d import cli
from pade3d.config import read_manifest
from pade3d.network import read_deployment_csv
from pade3d.pade import read_pade_csv
from pade3d.pmde import first_hop_bound

FAST = ["--na", "20", "--radius", "35", "--max-iter", "20", "--seed", "3"]


def test_generate_counts_and_idempotent(tmp_path):
    args = ["generate", "--repeats", "2", "--out", str(tmp_path)]
    assert cli.main(args) == 0
    files = sorted((tmp_path / "deployments").glob("*.csv"))
    assert [f.name for f in files] == [
        "multimodal_000.csv", "multimodal_001.csv", "uniform_000.csv", "uniform_001.csv"]
    first = [f.read_bytes() for f in files]
    assert cli.main(args) == 0
    assert [f.read_bytes() for f in files] == first
    net = read_deployment_csv(files[0], 30.0)
    assert net.n_nodes == 150 and len(net.anchor_ids) == 10


def test_default_generate_makes_fifty_each(tmp_path):
    assert cli.main(["generate", "--out", str(tmp_path)]) == 0
    names = [f.name for f in (tmp_path / "deployments").glob("*.csv")]
    assert sum(n.startswith("uniform") for n in names) == 50
    assert sum(n.startswith("multimodal") for n in names) == 50


def test_run_and_report(tmp_path, capsys):
    out = tmp_path / "run"
    code = cli.main(["run", *FAST, "--repeats", "2", "--dist", "uniform", "--out", str(out)])
    assert code == 0
    printed = capsys.readouterr().out
    with (out / "summary.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert {r["method"] for r in rows} == {"classic", "moga"}
    for r in rows:
        # printed table carries the same ALA to two decimals
        assert f"{float(r['ala_pct']):9.2f}" in printed
    config = read_manifest(out / "manifest.json")
    assert config.anchor_counts == (20,) and config.max_iter == 20 and config.seed == 3
    assert cli.main(["report", "--out", str(out)]) == 0
    assert "moga" in capsys.readouterr().out


def test_method_classic_only(tmp_path):
    out = tmp_path / "c"
    assert cli.main(["run", *FAST, "--repeats", "1", "--dist", "uniform", "--method", "classic",
                     "--out", str(out)]) == 0
    lines = (out / "results.csv").read_text().splitlines()[1:]
    assert len(lines) == 1 and ",classic," in lines[0]


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("repeats: 1\nmax_iter: 10\nanchor_counts: [10]\nradii: [40]\ndistributions: [uniform]\n")
    out = tmp_path / "o"
    assert cli.main(["run", "--config", str(cfg), "--method", "classic", "--seed", "9", "--out", str(out)]) == 0
    c = read_manifest(out / "manifest.json")
    assert c.seed == 9 and c.radii == (40.0,) and c.methods == ("classic",)


def test_total_failure_exit_code(tmp_path, monkeypatch):
    from pade3d import experiment

    def boom(*a, **k):
        raise RuntimeError("x")
    monkeypatch.setattr(experiment, "localize", boom)
    assert cli.main(["run", *FAST, "--repeats", "1", "--dist", "uniform", "--out", str(tmp_path)]) == 2


def test_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["run", "--dist", "sphere"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        cli.main([])
    assert e.value.code == 1
    assert cli.main(["run", "--repeats", "0", "--out", str(tmp_path)]) == 1
    assert cli.main(["report", "--out", str(tmp_path / "missing")]) == 1


def test_tables_dump_and_revalidate(tmp_path):
    assert cli.main(["tables", "--na", "25", "--radius", "30", "--out", str(tmp_path)]) == 0
    rows = read_pade_csv(tmp_path / "pade.csv")
    assert rows
    for r in rows:
        assert r["lb"] <= r["e_dis"] + 1e-6 and r["e_dis"] <= r["ub"] + 1e-6
        assert r["ub"] <= r["m"] * 30.0 + 1e-6
        if r["m"] == 1:
            assert r["lb"] == 0.0


def test_tables_single_anchor_closed_form(tmp_path):
    # anchor 0 with three neighbors, nothing further out
    dep = tmp_path / "d.csv"
    dep.write_text(
        "node_id,x,y,z,is_anchor\n"
        "0,50,50,50,1\n1,60,50,50,1\n2,50,60,50,1\n3,50,50,60,1\n4,5,5,5,0\n"
    )
    assert cli.main(["tables", "--deployment", str(dep), "--radius", "11", "--out", str(tmp_path)]) == 0
    rows = [r for r in read_pade_csv(tmp_path / "pade.csv") if r["anchor_id"] == 0]
    assert len(rows) == 1 and rows[0]["m"] == 1
    assert rows[0]["ub"] == pytest.approx(first_hop_bound(3, 11.0), abs=1e-6)


def test_tables_empty_census(tmp_path):
    dep = tmp_path / "d.csv"
    dep.write_text(
        "node_id,x,y,z,is_anchor\n"
        "0,0,0,0,1\n1,90,0,0,1\n2,0,90,0,1\n3,0,0,90,1\n4,90,90,90,0\n"
    )
    assert cli.main(["tables", "--deployment", str(dep), "--radius", "5", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "pade.csv").read_text().splitlines() == ["anchor_id,m,lb,e_dis,ub"]
