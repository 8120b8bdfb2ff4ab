import json
import subprocess
import sys

import numpy as np
import pytest

from pamkit.cli import main
from pamkit.dataset import preprocess
from pamkit.exceptions import ParseError
from pamkit.io import SCHEMA_VERSION, load_scenarios, read_dataset, read_lme_table, write_dataset
from pamkit.simulation import generate_input_sequence, simulate_dataset


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "pamkit.cli", *map(str, args)], capture_output=True, text=True)


# --- preprocessing ---------------------------------------------------------


def test_preprocess_rules():
    rows = [
        dict(u="1", rt="0.10", choice="1"),
        dict(u="0", rt="", choice=""),
        dict(u="1", rt="0.52", choice="0"),
        dict(u="0", rt="nan", choice="1"),
    ]
    ds, rep = preprocess(rows)
    assert ds.valid.tolist() == [False, False, True, False]
    assert ds.u.tolist() == [1, 0, 1, 0]
    assert rep == dict(n_trials=4, n_valid=1, n_missing=2, n_anticipated=1)
    ds, _ = preprocess(rows, rt_cutoff=0.05)
    assert ds.valid[0]


def test_preprocess_reports_bad_rows():
    rows = [dict(u="1", rt="0.4", choice="1"), dict(u="2", rt="0.4", choice="1"), dict(u="1", rt="-1", choice="0"),
            dict(u="1", rt="abc", choice="0")]
    with pytest.raises(ParseError) as exc:
        preprocess(rows)
    assert exc.value.rows == [2, 3, 4]


def test_dataset_csv_round_trip(tmp_path):
    u = generate_input_sequence(0)
    d = simulate_dataset("ddm", dict(b_w=0.3, a_a=1.2, b_a=0, a_v=2, b_v=0, ter=0.15), u, -4.0, 0)
    d.rt[3] = np.nan
    d.choice[3] = np.nan
    write_dataset(tmp_path / "d.csv", d)
    back, rep = read_dataset(tmp_path / "d.csv")
    assert np.array_equal(back.u, d.u)
    np.testing.assert_array_equal(back.rt, d.rt)
    assert rep["n_trials"] == 400 and rep["n_missing"] == 1


def test_read_dataset_missing_column(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("u,rt\n1,0.3\n")
    with pytest.raises(ParseError):
        read_dataset(p)


def test_lme_table(tmp_path):
    p = tmp_path / "lme.csv"
    p.write_text("subject,A,B\ns1,-10,-12\ns2,-11,-9\n")
    labels, subjects, m = read_lme_table(p)
    assert labels == ["A", "B"] and subjects == ["s1", "s2"] and m.shape == (2, 2)
    p.write_text("A,B\n-1,-2\n-1,x\n")
    with pytest.raises(ParseError):
        read_lme_table(p)


# --- CLI -------------------------------------------------------------------


def test_cli_pipeline(tmp_path):
    assert main(["scenarios", "--grid", "ddm_w", "--out", str(tmp_path / "sc.json")]) == 0
    scenarios, _ = load_scenarios(tmp_path / "sc.json")
    assert len(scenarios) == 8
    main(["simulate", "--model", "ddm_w", "--scenario", str(tmp_path / "sc.json"), "--index", "0",
          "--subjects", "2", "--seed", "4", "--out", str(tmp_path / "sim")])
    truth = json.loads((tmp_path / "sim" / "truth.json").read_text())
    assert truth["schema_version"] == SCHEMA_VERSION and truth["files"] == ["subject_000.csv", "subject_001.csv"]
    first = (tmp_path / "sim" / "subject_000.csv").read_bytes()
    main(["simulate", "--model", "ddm_w", "--scenario", str(tmp_path / "sc.json"), "--index", "0",
          "--subjects", "1", "--seed", "4", "--out", str(tmp_path / "sim2")])
    assert (tmp_path / "sim2" / "subject_000.csv").read_bytes() == first

    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"max_iter": 300, "rt_cutoff": 0.15}))
    main(["fit", "--model", "ddm_w", "--data", str(tmp_path / "sim" / "subject_000.csv"), "--config", str(cfg),
          "--out", str(tmp_path / "fit.json"), "--trajectory"])
    doc = json.loads((tmp_path / "fit.json").read_text())
    assert doc["schema_version"] == SCHEMA_VERSION
    assert doc["config"]["max_iter"] == 300 and doc["config"]["config_id"] == "ddm_w"
    res = doc["result"]
    assert set(res["native"]) == {"omega2", "b_w", "a_a", "b_a", "a_v", "b_v", "ter"}
    assert set(res["estimation"]) == set(res["native"])
    assert all(k in res for k in ("lme", "aic", "bic"))
    assert len(doc["trajectory"]["muhat1"]) == 400

    (tmp_path / "lme.csv").write_text("m1,m2\n-100,-90\n-80,-75\n-120,-100\n")
    main(["bms", "--lme", str(tmp_path / "lme.csv"), "--out", str(tmp_path / "bms.json"), "--samples", "5000",
          "--burn-in", "500"])
    bms = json.loads((tmp_path / "bms.json").read_text())
    assert bms["result"]["labels"] == ["m1", "m2"]
    assert bms["result"]["exceedance_probability"][1] > 0.8


def test_cli_recover_jobs_identical(tmp_path):
    sc = tmp_path / "sc.json"
    main(["scenarios", "--grid", "lnr", "--out", str(sc)])
    doc = json.loads(sc.read_text())
    doc["scenarios"] = doc["scenarios"][:2]
    sc.write_text(json.dumps(doc))
    for jobs in (1, 8):
        main(["recover", "--scenarios", str(sc), "--subjects", "2", "--seed", "3", "--jobs", str(jobs),
              "--out", str(tmp_path / f"j{jobs}")])
    for name in ("summary.csv", "raw.csv", "failures.csv", "manifest.json"):
        assert (tmp_path / "j1" / name).read_bytes() == (tmp_path / "j8" / name).read_bytes()
    assert "median" in (tmp_path / "j1" / "summary.csv").read_text().splitlines()[0]


@pytest.mark.parametrize(
    "args,kind",
    [
        (["fit", "--model", "ddm_w", "--data", "nope.csv", "--out", "x.json"], "FileNotFoundError"),
        (["fit", "--model", "bogus", "--data", "a", "--out", "b"], "UsageError"),
        (["fit", "--unknown"], "UsageError"),
        (["bms"], "UsageError"),
    ],
)
def test_cli_errors_are_json(args, kind, tmp_path):
    proc = run_cli(*args)
    assert proc.returncode != 0
    err = json.loads(proc.stderr.strip().splitlines()[-1])
    assert err["error"] == kind and err["message"]


def test_cli_bad_data_rows(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("trial,u,rt,choice\n1,1,0.4,1\n2,3,0.5,0\n")
    proc = run_cli("fit", "--model", "ddm_w", "--data", p, "--out", tmp_path / "o.json")
    err = json.loads(proc.stderr)
    assert proc.returncode != 0 and err["error"] == "ParseError" and "2" in err["message"]
    assert not (tmp_path / "o.json").exists()


def test_cli_model_scenario_mismatch(tmp_path):
    sc = tmp_path / "sc.json"
    main(["scenarios", "--grid", "lnr", "--out", str(sc)])
    proc = run_cli("simulate", "--model", "ddm_w", "--scenario", sc, "--index", "0", "--out", tmp_path / "o")
    assert proc.returncode != 0 and "does not match" in json.loads(proc.stderr)["message"]
