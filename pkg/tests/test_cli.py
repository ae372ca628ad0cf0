import json
import os

import pytest

from udn.cli import EXIT_INVALID, EXIT_OK, EXIT_PARTIAL, main
from udn.sweep import COLUMNS, SCHEMA_VERSION, read_csv

SMALL = {
    "scenario": {
        "propagation": {"los_loss_1km_db": 103.8, "los_exponent": 2.09,
                        "nlos_loss_1km_db": 145.4, "nlos_exponent": 3.75},
        "los_model": {"type": "exp_square", "scale_km": 0.0825},
    },
    "densities": {"values_per_km2": [10, 100, 1000]},
    "power_search": {"enabled": True},
    "fits": {"ase_intervals_per_km2": [[10, 1000]], "power_intervals_per_km2": [[10, 1000]]},
    "monte_carlo": {"enabled": False, "drops": 1000, "seed": 3},
}


@pytest.fixture
def cfg_path(tmp_path):
    def make(overrides=None):
        d = json.loads(json.dumps(SMALL))
        for k, v in (overrides or {}).items():
            d[k] = v
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps(d, indent=2))
        return str(p)
    return make


def read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def test_validate_ok(cfg_path, capsys):
    assert main(["validate", "--config", cfg_path()]) == EXIT_OK
    assert "ok (3 densities)" in capsys.readouterr().out


def test_validate_reports_diagnostics(cfg_path, capsys):
    path = cfg_path({"load": {"type": "reuse", "reuse_n": 0}, "extra": 1})
    assert main(["validate", "--config", path]) == EXIT_INVALID
    err = capsys.readouterr().err
    assert "extra" in err and "reuse_n" in err
    assert err.count("line ") >= 2


def test_missing_file(tmp_path):
    assert main(["validate", "--config", str(tmp_path / "nope.json")]) == EXIT_INVALID


def test_sweep_writes_outputs(cfg_path, tmp_path):
    out = tmp_path / "out"
    assert main(["sweep", "--config", cfg_path(), "--out", str(out)]) == EXIT_OK
    text = read(out / "sweep.csv")
    assert text.startswith(f"# schema_version={SCHEMA_VERSION}")
    rows = read_csv(text)
    assert [r["lambda_per_km2"] for r in rows] == [10.0, 100.0, 1000.0]
    assert list(rows[0]) == list(COLUMNS)
    for r in rows:
        assert 0 < r["outage"] < 1
        assert r["p_tx_dbm"] is not None and r["ee_bits_per_joule"] > 0
        assert r["mc_outage"] is None and "mc_outage=mc_disabled" in r["null_reasons"]
    fits = read(out / "fits.txt").splitlines()
    assert any(line.startswith("ase,10.0,1000.0,") for line in fits)
    assert any(line.startswith("p_tx_watts_vs_per_m2,") for line in fits)
    assert read(out / "optimum.txt")
    assert not [f for f in os.listdir(out) if f.endswith(".tmp")]


def test_fit_round_trip(cfg_path, tmp_path):
    out = tmp_path / "a"
    path = cfg_path()
    assert main(["sweep", "--config", path, "--out", str(out)]) == EXIT_OK
    refit = tmp_path / "b"
    assert main(["fit", "--config", path, "--out", str(refit), str(out / "sweep.csv")]) == EXIT_OK
    assert read(refit / "fits.txt") == read(out / "fits.txt")
    assert read(refit / "optimum.txt") == read(out / "optimum.txt")


def test_power_requires_search(cfg_path, tmp_path):
    path = cfg_path({"power_search": {"enabled": False}})
    assert main(["power", "--config", path, "--out", str(tmp_path)]) == EXIT_INVALID


def test_partial_failure_exit_code(cfg_path, tmp_path):
    path = cfg_path({"power_search": {"enabled": True, "max_steps_per_level": 1}})
    assert main(["power", "--config", path, "--out", str(tmp_path)]) == EXIT_PARTIAL
    rows = read_csv(read(tmp_path / "sweep.csv"))
    assert len(rows) == 3
    assert all("error:PowerSearchError" in r["null_reasons"] for r in rows)


def test_mc_is_deterministic_across_threads(cfg_path, tmp_path):
    path = cfg_path({"densities": {"values_per_km2": [100]}})
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["mc", "--config", path, "--out", str(a), "--mc-drops", "1000"]) == EXIT_OK
    assert main(["mc", "--config", path, "--out", str(b), "--mc-drops", "1000",
                 "--threads", "2"]) == EXIT_OK
    assert read(a / "sweep.csv") == read(b / "sweep.csv")
    row = read_csv(read(a / "sweep.csv"))[0]
    assert 0 < row["mc_outage"] < 1 and row["mc_outage_half_width"] > 0
    assert row["outage"] is None


def test_seed_changes_mc(cfg_path, tmp_path):
    path = cfg_path({"densities": {"values_per_km2": [100]}})
    a, b = tmp_path / "a", tmp_path / "b"
    main(["mc", "--config", path, "--out", str(a), "--mc-drops", "1000", "--seed", "1"])
    main(["mc", "--config", path, "--out", str(b), "--mc-drops", "1000", "--seed", "2"])
    assert read(a / "sweep.csv") != read(b / "sweep.csv")


def test_bad_arguments():
    with pytest.raises(SystemExit):
        main(["sweep", "--config", "x.json", "--threads", "0"])
    with pytest.raises(SystemExit):
        main(["mc", "--config", "x.json", "--seed", "-1"])


def test_claims_subset(tmp_path, capsys):
    code = main(["claims", "--out", str(tmp_path), "--only", "10-pa-formula",
                 "--mc-drops", "2000"])
    report = json.loads(read(tmp_path / "claims.json"))
    assert [c["id"] for c in report["claims"]] == ["10-pa-formula"]
    assert code == (EXIT_OK if report["passed"] else EXIT_PARTIAL)
    assert "10-pa-formula" in capsys.readouterr().out


def test_claims_unknown_id(tmp_path):
    assert main(["claims", "--out", str(tmp_path), "--only", "99-nope"]) == EXIT_INVALID
