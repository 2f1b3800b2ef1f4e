import numpy as np
import pytest

from hmlab import Disk, Domain, Segment, save_domain, unit_disk
from hmlab.cli import main
from hmlab.scenarios import gen_shrinking_disks


@pytest.fixture
def disk_file(tmp_path):
    p = tmp_path / "disk.json"
    save_domain(unit_disk(), p)
    return str(p)


def test_version_and_help(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--version"])
    assert e.value.code == 0


def test_sample_then_w1(tmp_path, disk_file, capsys):
    mu, nu, plan = (str(tmp_path / f) for f in ("mu.csv", "nu.csv", "p.csv"))
    assert main(["sample", disk_file, "--basepoint", "0,0", "--out", mu,
                 "--samples", "2000", "--seed", "1"]) == 0
    assert main(["sample", disk_file, "--basepoint", "0.5,0", "--out", nu,
                 "--samples", "2000", "--seed", "2"]) == 0
    assert main(["w1", mu, nu, "--plan", plan, "--tolerance", "1.0"]) == 0
    assert main(["w1", mu, nu, "--tolerance", "0.01"]) == 2
    out = capsys.readouterr().out
    assert "W1 =" in out
    assert "src,dst,mass" in open(plan).read()


def test_w1_subsample_flag(tmp_path, disk_file, capsys):
    mu, nu = (str(tmp_path / f) for f in ("mu.csv", "nu.csv"))
    for path, bp, seed in ((mu, "0,0", 1), (nu, "0.5,0", 2)):
        assert main(["sample", disk_file, "--basepoint", bp, "--out", path,
                     "--samples", "6000", "--seed", str(seed)]) == 0
    # raw 6000-atom measures exceed the exact-transport cap
    assert main(["w1", mu, nu]) == 1
    assert "cap" in capsys.readouterr().err
    assert main(["w1", mu, nu, "--subsample", "512"]) == 0
    first = capsys.readouterr().out
    assert main(["w1", mu, nu, "--subsample", "512"]) == 0
    assert capsys.readouterr().out == first


def test_interior_verdicts(tmp_path, disk_file, capsys):
    small = tmp_path / "small.json"
    save_domain(Domain(Disk((0.0, 0.0), 0.5)), small)
    reg = str(tmp_path / "reg.csv")
    assert main(["interior", "--limit", disk_file, "--basepoint", "0,0",
                 "--eps", "0.3", "--out", reg]) == 0
    assert "cells" in capsys.readouterr().out
    assert open(reg).read().startswith("# hmlab grid region")
    # a shrunken family member pulls the region too far from the limit
    assert main(["interior", "--limit", disk_file, "--family", str(small),
                 "--basepoint", "0,0", "--eps", "0.1"]) == 2


def test_beurling_and_perfectness(tmp_path, capsys):
    slit = tmp_path / "slit.json"
    save_domain(Domain(Disk((0.0, 0.0), 1.0),
                       (Segment((0.2, 0.0), (0.7, 0.0)),)), slit)
    assert main(["beurling", str(slit), "--basepoint=-0.4,0",
                 "--samples", "8000"]) == 0
    assert main(["perfectness", str(slit)]) == 0
    assert "pass" in capsys.readouterr().out


def test_regularity_exit_codes(tmp_path, disk_file, capsys):
    assert main(["regularity", disk_file, "--delta", "0.4",
                 "--samples", "1200"]) == 0
    spiky = tmp_path / "spiky.json"
    save_domain(Domain(Disk((0.0, 0.0), 1.0), (Disk((0.5, 0.0), 1e-7),)),
                spiky)
    assert main(["regularity", str(spiky), "--delta", "0.3",
                 "--samples", "1200"]) == 2


def test_scenario_gen_run_cycle(tmp_path, capsys):
    scen_path = str(tmp_path / "scen.json")
    assert main(["scenario", "gen", "shrinking-disks", "--n-max", "8",
                 "--seed", "3", "--out", scen_path]) == 0
    assert main(["scenario", "run", scen_path, "--checkers", "kernel",
                 "--out-dir", str(tmp_path / "out")]) == 0
    out = capsys.readouterr().out
    assert "all verdicts match expectations" in out
    assert (tmp_path / "out" / "shrinking-disks.report.csv").exists()


def test_check_convergence_deviation_exit(tmp_path, capsys):
    scen = gen_shrinking_disks(8, seed=3)
    scen.checkers = {"kernel": dict(scen.checkers["kernel"], expect=[False, False])}
    path = tmp_path / "wrong.json"
    scen.save(path)
    assert main(["check-convergence", str(path)]) == 2
    assert "deviations" in capsys.readouterr().out


def test_error_exit_code(capsys):
    assert main(["check-convergence", "does-not-exist.json"]) == 1
    assert "error:" in capsys.readouterr().err
