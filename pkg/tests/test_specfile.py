import json
from fractions import Fraction as F
from pathlib import Path

import pytest

from ignorability_lab import catalog, specfile
from ignorability_lab.bayes import Prior
from ignorability_lab.classify import classify
from ignorability_lab.errors import ValidationError
from ignorability_lab.likelihood import ignoring_likelihood, l5

GOLDEN = Path(__file__).parent / "data" / "four_coordinate.json"


def test_golden_file_loads():
    b = specfile.load(GOLDEN)
    assert b.realisation.record.observed_values == (10, 4, 2)
    c = classify(b.missingness_model, b.realisation)
    assert c.everywhere_mar.holds and not c.realised_mcar.holds
    # hand computation: L5 = 1/2 * phi and L2 = theta * (1 - theta) * 2/3
    assert [v for _, v in l5(b.missingness_model, b.realisation).items()] == [F(1, 4), F(3, 8)]
    l2 = ignoring_likelihood(b.data_model, b.realisation)
    assert [v for _, v in l2.items()] == [t[0] * (1 - t[0]) * F(2, 3) for t in b.data_model.theta_grid]


def test_golden_matches_catalog():
    b = specfile.load(GOLDEN)
    ex = catalog.four_coordinate_example()
    assert b.data_model.tables == ex.data_model.tables
    assert b.missingness_model.kernels == ex.missingness_model.kernels


def _doc():
    return json.loads(GOLDEN.read_text())


def test_bad_column_names_cell():
    doc = _doc()
    doc["missingness_model"]["iid"]["unit_kernels"][0]["10"][1] = "2/5"
    with pytest.raises(ValidationError) as exc:
        specfile.validate(doc)
    assert any("sums to 9/10" in e and "phi=1/2" in e and "y=(4,3)" in e for e in exc.value.errors)


def test_unknown_key_path():
    doc = _doc()
    doc["data_model"]["bogus"] = 1
    with pytest.raises(ValidationError) as exc:
        specfile.validate(doc)
    assert any(e.startswith("$.data_model") and "bogus" in e for e in exc.value.errors)


def test_all_errors_collected():
    doc = _doc()
    doc["data_model"]["iid"]["unit_tables"][0][0] = "1/3"
    doc["missingness_model"]["iid"]["unit_kernels"][1]["11"][0] = "1"
    doc["realisation"]["y"] = [10, 3, 4, 7]
    with pytest.raises(ValidationError) as exc:
        specfile.validate(doc)
    assert len(exc.value.errors) >= 3


def test_json_syntax_error_position(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{\n  "space": {,}\n}')
    with pytest.raises(ValidationError) as exc:
        specfile.load(p)
    assert "line 2" in exc.value.errors[0]


@pytest.mark.parametrize("name", sorted(catalog.EXAMPLES))
def test_round_trip(name):
    ex = catalog.EXAMPLES[name]()
    back = specfile.validate(specfile.to_document(ex))
    assert back.data_model.tables == ex.data_model.tables
    assert back.missingness_model.kernels == ex.missingness_model.kernels
    assert back.realisation == ex.realisation
    assert back.joint_space.pairs == ex.joint_space.pairs


def test_float_mode():
    b = specfile.load(GOLDEN, "float")
    assert not specfile.is_exact_bundle(b)
    assert all(isinstance(v, float) for v in b.data_model.tables[b.data_model.theta_grid[0]])


def test_prior_validation():
    ex = catalog.two_unit_mcar()
    dm, mm = ex.data_model, ex.missingness_model
    p = specfile.validate_prior({"theta": ["1/2", "1/4", "1/4"], "phi": ["1/3", "1/3", "1/3"]}, dm, mm)
    assert isinstance(p, Prior) and p.is_independent()
    with pytest.raises(ValidationError):
        specfile.validate_prior({"theta": ["1/2", "1/2"], "phi": ["1"]}, dm, mm)


def test_plan_validation():
    plan = specfile.validate_plan({"builtin": "mcar-control", "n_replications": 10, "seed": 3, "grid_denominator": 20})
    assert plan.n_replications == 10 and plan.seed == 3 and len(plan.dm.theta_grid) == 19
    with pytest.raises(ValidationError):
        specfile.validate_plan({"builtin": "nope"})
    with pytest.raises(ValidationError):
        specfile.validate_plan({"unit_model": {"space": {}}})


def test_unit_model_plan():
    unit = catalog.bernoulli_unit([F(k, 10) for k in range(1, 10)])
    mcar = catalog.mcar_unit([F(1, 2)])
    from ignorability_lab.model import ModelBundle

    doc = specfile.to_document(ModelBundle(unit.space, unit, mcar))
    plan = specfile.validate_plan({"unit_model": doc, "theta_true": "3/10", "phi_true": "1/2",
                                   "n_units": 20, "n_replications": 50})
    assert plan.theta_true == (F(3, 10),)
