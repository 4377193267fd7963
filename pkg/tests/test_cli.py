import csv
import json

import numpy as np
import pytest

from fma_netlab import __version__
from fma_netlab.activity import ActivityRecord
from fma_netlab.cli import EXIT_DATA, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, effective_config, main
from fma_netlab.ingest import write_activity_json, write_follows_csv, write_users_csv

from oracles import brute_force_filter, filter_fixture

DIAG_FLAGS = ["--cohorts", "periods:5", "--lifetime-step", "1", "--granularity", "10",
              "--min-lifetime-fraction", "0.2", "--min-cohort-size", "30"]


@pytest.fixture(scope="module")
def sim_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("sim")
    assert main(["simulate", "--n", "3000", "--m", "2", "--seed", "7", "--out-dir", str(d)]) == EXIT_OK
    rng = np.random.default_rng(1)
    recs = []
    for u in range(3000):
        s = int(rng.poisson(5))
        recs.append(ActivityRecord(u, int(rng.binomial(s, 0.6)), s, int(rng.poisson(3)), int(rng.poisson(10)),
                                   f"u{u}"))
    write_activity_json(d / "activity.json", recs)
    return d


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_simulate_outputs(sim_dir):
    meta = json.loads((sim_dir / "simulation.json").read_text())
    assert meta["n_seed"] == 3 and meta["users"] == 3000 and meta["edges"] == 6000
    assert meta["fma_ground_truth"] == "present"
    run = json.loads((sim_dir / "simulate.run.json").read_text())
    assert run["tool_version"] == __version__
    assert set(run["artifacts"]) == {"users.csv", "follows.csv", "simulation.json"}


def test_filter_report_matches_oracle(tmp_path):
    users, follows = filter_fixture()
    write_users_csv(tmp_path / "users.csv", users)
    write_follows_csv(tmp_path / "follows.csv", follows)
    out = tmp_path / "out"
    assert main(["filter", "--data-dir", str(tmp_path), "--min-followers", "5", "--out-dir", str(out)]) == 0
    report = json.loads((out / "filter_report.json").read_text())
    expected, survivors, _ = brute_force_filter(users, follows, 5)
    assert [(s["stage"], s["users"], s["links"]) for s in report["stages"]] == expected
    assert {int(r[0]) for r in _read_csv(out / "users.csv")[1:]} == survivors


def test_distribution_is_deterministic(tmp_path):
    for run in ("a", "b"):
        assert main(["simulate", "--n", "1000", "--m", "2", "--seed", "7", "--out-dir", str(tmp_path / run)]) == 0
        assert main(["distribution", "--data-dir", str(tmp_path / run),
                     "--out-dir", str(tmp_path / run / "dist")]) == 0
    for name in ("degree_histogram_exact.csv", "degree_histogram_logarithmic.csv", "power_law_fit.json"):
        assert (tmp_path / "a/dist" / name).read_bytes() == (tmp_path / "b/dist" / name).read_bytes()


def test_diagnose_present_on_constant_rate_ba(sim_dir, tmp_path):
    assert main(["diagnose", "--data-dir", str(sim_dir), "--out-dir", str(tmp_path), *DIAG_FLAGS]) == 0
    v = json.loads((tmp_path / "verdict.json").read_text())
    assert v["verdict"] == "present" and v["dominance_score"] >= 0.9
    assert (tmp_path / "cohort_curves.csv").exists() and (tmp_path / "growth.csv").exists()


def test_centrality_top_table_shape(sim_dir, tmp_path):
    assert main(["centrality", "--data-dir", str(sim_dir), "--top-k", "10", "--out-dir", str(tmp_path)]) == 0
    rows = _read_csv(tmp_path / "top_table.csv")
    assert rows[0] == ["rank", "pagerank_login", "pagerank", "authority_login", "authority", "followers_login",
                       "followers", "merged_prs_login", "merged_prs", "issues_login", "issues"]
    assert len(rows) == 11 and [r[0] for r in rows[1:]] == [str(i) for i in range(1, 11)]
    pr = _read_csv(tmp_path / "ranking_pagerank.csv")[1:]
    assert [r[2] for r in pr] == [r[1] for r in rows[1:]]
    vals = [float(r[3]) for r in pr]
    assert vals == sorted(vals, reverse=True)


def test_activity_outputs(sim_dir, tmp_path):
    assert main(["activity", "--data-dir", str(sim_dir), "--out-dir", str(tmp_path)]) == 0
    corr = json.loads((tmp_path / "correlation.json").read_text())
    assert corr["n_users"] == 100
    rho = np.array(corr["rho"])
    assert np.array_equal(np.diag(rho), np.ones(4)) and np.array_equal(rho, rho.T)
    ratios = _read_csv(tmp_path / "merge_ratio.csv")[1:]
    assert all(r[4] == "" for r in ratios if r[3] == "0")


def test_exit_codes(sim_dir, tmp_path, capsys):
    assert main(["centrality", "--out-dir", str(tmp_path)]) == EXIT_USAGE
    assert main(["centrality", "--users", str(tmp_path / "no.csv"), "--follows", str(tmp_path / "no.csv"),
                 "--out-dir", str(tmp_path)]) == EXIT_DATA
    assert main(["centrality", "--data-dir", str(sim_dir), "--max-iterations", "2",
                 "--out-dir", str(tmp_path)]) == EXIT_NUMERIC
    with pytest.raises(SystemExit) as exc:
        main(["centrality", "--no-such-flag"])
    assert exc.value.code == EXIT_USAGE
    assert main(["simulate", "--n", "2", "--m", "2", "--out-dir", str(tmp_path)]) == EXIT_USAGE
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nonsense_key": 1}))
    assert main(["simulate", "--config", str(bad), "--out-dir", str(tmp_path)]) == EXIT_USAGE
    # activity without activity data is a data error
    (tmp_path / "d").mkdir()
    for name in ("users.csv", "follows.csv"):
        (tmp_path / "d" / name).write_bytes((sim_dir / name).read_bytes())
    assert main(["activity", "--data-dir", str(tmp_path / "d"), "--out-dir", str(tmp_path)]) == EXIT_DATA


def test_config_precedence(tmp_path):
    cfg_file = tmp_path / "c.json"
    cfg_file.write_text(json.dumps({"seed": 3, "simulate": {"n": 50, "m": 1}}))
    out = tmp_path / "o"
    assert main(["simulate", "--config", str(cfg_file), "--m", "2", "--out-dir", str(out)]) == 0
    run = json.loads((out / "simulate.run.json").read_text())
    assert run["config"]["seed"] == 3  # file
    assert run["config"]["n"] == 50  # command section of the file
    assert run["config"]["m"] == 2  # flag wins
    assert run["config"]["steps"] == 100  # default
    assert effective_config("filter")["min_followers"] == 5
    assert effective_config("centrality")["damping"] == 0.85 and effective_config("centrality")["top_k"] == 10
    assert effective_config("activity")["corr_top_k"] == 100
    assert effective_config("diagnose")["min_lifetime_days"] == 365.0


def test_report_bundle_replays(sim_dir, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["report", "--data-dir", str(sim_dir), "--out-dir", str(a), *DIAG_FLAGS]) == 0
    bundle = json.loads((a / "report.json").read_text())
    assert bundle["tool_version"] == __version__
    assert bundle["run_config"]["config"]["damping"] == 0.85
    assert {"verdict.json", "top_table.csv", "correlation.csv", "cohort_curves.csv", "growth.csv",
            "power_law_fit.json"} <= set(bundle["outputs"])
    assert main(["report", "--from-bundle", str(a / "report.json"), "--out-dir", str(b)]) == 0
    for name in bundle["outputs"]:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()


def test_thread_cap_does_not_change_output(sim_dir, tmp_path, monkeypatch):
    assert main(["centrality", "--data-dir", str(sim_dir), "--out-dir", str(tmp_path / "x")]) == 0
    monkeypatch.setenv("FMA_NETLAB_THREADS", "1")
    assert main(["centrality", "--data-dir", str(sim_dir), "--out-dir", str(tmp_path / "y")]) == 0
    for name in ("ranking_pagerank.csv", "ranking_hits_authority.csv", "top_table.csv"):
        assert (tmp_path / "x" / name).read_bytes() == (tmp_path / "y" / name).read_bytes()
    monkeypatch.setenv("FMA_NETLAB_THREADS", "many")
    assert main(["centrality", "--data-dir", str(sim_dir), "--out-dir", str(tmp_path / "z")]) == EXIT_USAGE


def test_ingest_manifest(sim_dir, tmp_path):
    assert main(["ingest", "--data-dir", str(sim_dir), "--out-dir", str(tmp_path)]) == 0
    m = json.loads((tmp_path / "manifest.json").read_text())
    assert m["counts"] == {"users": 3000, "follows": 6000, "graph_users": 3000, "graph_edges": 6000,
                           "activity": 3000}
    assert len(m["checksums"]) == 3 and m["time_range"] == [0, 99]
