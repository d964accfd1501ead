import json
from pathlib import Path

import pytest

from ignorability_lab import cli, reports

GOLDEN = str(Path(__file__).parent / "data" / "four_coordinate.json")


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_text(capsys):
    code, out, _ = run(capsys, "classify", "--input", GOLDEN)
    assert code == 0
    assert "everywhere MAR " in out and "realised MCAR" in out


def test_classify_json_embeds_manifest(capsys):
    code, out, _ = run(capsys, "classify", "--input", GOLDEN, "--format", "json")
    doc = json.loads(out)
    m = doc["manifest"]["fields"]
    assert m["subcommand"] == "classify" and len(m["input_sha256"]) == 64
    rep, _ = reports.from_json(out)
    assert rep.everywhere_mar.holds


def test_likelihood_csv(capsys):
    code, out, _ = run(capsys, "likelihood", "--example", "two-unit-mcar", "--object", "l3", "--phi", "1/2",
                       "--format", "csv")
    assert code == 0
    assert out == "point,value\n1/4,1/16\n1/2,1/8\n3/4,3/16\n"


def test_likelihood_cutoff(capsys):
    code, out, _ = run(capsys, "likelihood", "--example", "two-unit-mcar", "--cutoff", "1/2", "--format", "csv")
    assert out.splitlines()[1:] == ["1/4,1/4,false", "1/2,1/2,true", "3/4,3/4,true"]


def test_bayes_prior_file(capsys, tmp_path):
    p = tmp_path / "prior.json"
    p.write_text(json.dumps({"prior": {"theta": ["1/3", "1/3", "1/3"], "phi": ["1/2", "1/4", "1/4"]}}))
    code, out, _ = run(capsys, "bayes", "--example", "two-unit-mcar", "--prior", str(p), "--format", "csv")
    assert code == 0
    assert "1/4,1/6,1/6" in out


def test_sampling_csv(capsys):
    code, out, _ = run(capsys, "sampling", "--example", "observe-depends-on-value", "--format", "csv")
    assert "1/2,1,1,8/13,1/2" in out


def test_verify_each_theorem(capsys):
    for th in ("1", "2", "3", "appendix"):
        code, out, _ = run(capsys, "verify", "--input", GOLDEN, "--theorem", th)
        assert code == 0
        json.loads(out)


def test_completeness(capsys):
    code, out, _ = run(capsys, "completeness", "--input", GOLDEN, "--format", "json")
    rep, _ = reports.from_json(out)
    assert rep.rank == 1


def test_validation_exit_code(capsys, tmp_path):
    doc = json.loads(Path(GOLDEN).read_text())
    doc["extra"] = True
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    code, _, err = run(capsys, "classify", "--input", str(p))
    assert code == 2 and "'extra'" in err


def test_missing_input_exit_code(capsys):
    code, _, err = run(capsys, "classify")
    assert code == 2


def test_resource_exit_code(capsys):
    code, _, err = run(capsys, "simulate", "--plan", "mcar-control", "--reps", "10", "--exact-units", "5")
    assert code == 3


def test_theorem_violation_exit_code(capsys, monkeypatch):
    from ignorability_lab import likelihood
    from ignorability_lab.errors import TheoremViolation

    def boom(*a, **k):
        raise TheoremViolation("forced")

    monkeypatch.setattr(likelihood, "verify_theorem1", boom)
    code, _, err = run(capsys, "verify", "--input", GOLDEN, "--theorem", "1")
    assert code == 4 and "forced" in err


def test_argparse_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["likelihood", "--example", "two-unit-mcar", "--object", "l9"])
    assert exc.value.code == 2


def test_search_writes_instances(capsys, tmp_path):
    out = tmp_path / "s"
    code, text, _ = run(capsys, "search", "--target", "realised_mar_not_everywhere_mar", "--budget", "3000",
                        "--max-hits", "2", "--out", str(out))
    assert code == 0
    summary, _ = reports.from_json((out / "summary.json").read_text())
    assert summary.n_hits >= 1
    for inst in summary.instances:
        code, cls_out, _ = run(capsys, "classify", "--input", str(out / inst["file"]), "--format", "json")
        rep, _ = reports.from_json(cls_out)
        assert rep.realised_mar.holds and not rep.everywhere_mar.holds


def test_simulate_cache(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.CACHE_ENV, str(tmp_path / "cache"))
    args = ["simulate", "--plan", "mcar-control", "--reps", "50", "--exact-units", "1", "--format", "json"]
    _, first, _ = run(capsys, *args)
    assert len(list((tmp_path / "cache").iterdir())) == 1
    _, second, _ = run(capsys, *args)
    assert first == second


def test_simulate_plan_file(capsys, tmp_path):
    p = tmp_path / "plan.json"
    p.write_text(json.dumps({"builtin": "monotone-mar", "grid_denominator": 50, "n_units": 30,
                             "n_replications": 100}))
    out = tmp_path / "r.csv"
    code, _, _ = run(capsys, "simulate", "--plan", str(p), "--out", str(out))
    assert code == 0
    assert out.read_text().startswith("section,field,value\n")
    rep, manifest = reports.from_json(out.with_suffix(".json").read_text())
    assert rep.simulation.n_replications == 100 and manifest.seed == 20240601
