import random
from fractions import Fraction as F

from hypothesis import given
from hypothesis import strategies as st

import oracles
from ignorability_lab import catalog
from ignorability_lab.classify import (
    DEFINITION_NAMES,
    classify,
    classify_covariate_dependent_mcar,
    classify_everywhere_mar,
    classify_realised_mar,
    witness_is_valid,
)
from ignorability_lab.model import ConditioningFunction, DataSpace, MissingnessModel, Pattern, Realisation
from ignorability_lab.random_models import binary_space, random_missingness_model, random_realisation


def _random_instance(seed):
    rng = random.Random(seed)
    space = binary_space(rng.randint(1, 3))
    mm = random_missingness_model(rng, space, rng.randint(1, 2), rng.choice(["any", "mcar", "mar"]))
    return mm, random_realisation(rng, mm, positive=False)


@given(st.integers(0, 10**9))
def test_classifier_matches_naive_loops(seed):
    mm, real = _random_instance(seed)
    c = classify(mm, real)
    y, bits = real.y_tilde, real.m_tilde.bits
    assert c.realised_mar.holds == oracles.realised_mar(mm, y, bits)
    assert c.everywhere_mar.holds == oracles.everywhere_mar(mm)
    assert c.realised_mcar.holds == oracles.realised_mcar(mm, y, bits)
    assert c.everywhere_mcar.holds == oracles.everywhere_mcar(mm)


@given(st.integers(0, 10**9))
def test_lattice_and_witnesses(seed):
    mm, real = _random_instance(seed)
    c = classify(mm, real)
    assert c.lattice_consistent
    for v in c.verdicts().values():
        if v is not None and not v.holds:
            assert witness_is_valid(mm, v.witness)


def test_value_dependent_fully_observed():
    # X never missing but its observation chance depends on X
    ex = catalog.fully_observed_value_dependent()
    c = classify(ex.missingness_model, ex.realisation)
    assert c.realised_mar.holds
    assert not c.everywhere_mar.holds
    assert witness_is_valid(ex.missingness_model, c.everywhere_mar.witness)


def test_mcar_example_all_true():
    ex = catalog.two_unit_mcar()
    c = classify(ex.missingness_model, ex.realisation)
    assert all(v.holds for v in c.verdicts().values() if v is not None)


def test_definition_names():
    assert DEFINITION_NAMES["realised_mar"] == "realised MAR"
    assert DEFINITION_NAMES["everywhere_mar"] == "everywhere MAR"
    assert DEFINITION_NAMES["realised_mcar"] == "realised MCAR"
    assert DEFINITION_NAMES["everywhere_mcar"] == "everywhere MCAR"


def test_realised_mar_ignores_unobserved_values():
    # One binary Y, missing; g differs by y for the observed pattern only.
    space = DataSpace.from_supports([(0, 1)])
    kern = {Pattern.parse("1"): (F(1, 2), F(1, 4)), Pattern.parse("0"): (F(1, 2), F(3, 4))}
    mm = MissingnessModel(space, [F(1)], [kern])
    assert not classify_realised_mar(mm, Realisation((0,), Pattern.parse("0"))).holds
    assert classify_realised_mar(mm, Realisation((0,), Pattern.parse("1"))).holds
    assert not classify_everywhere_mar(mm).holds


def test_covariate_dependent_mcar():
    # Two binary coordinates; Y2 observed with probability depending on Y1 only.
    space = DataSpace.from_supports([(0, 1), (0, 1)])
    seen = {0: F(1, 3), 1: F(3, 4)}

    def g(p, m, y):
        if m.bits == (1, 1):
            return seen[y[0]]
        if m.bits == (1, 0):
            return 1 - seen[y[0]]
        return 0

    mm = MissingnessModel.from_function(space, [F(1)], g, patterns=["11", "10"])
    real = Realisation((1, 0), Pattern.parse("10"))
    cond = ConditioningFunction.projection(space, [0], (1,))
    assert classify_covariate_dependent_mcar(mm, real, cond).holds
    assert not classify(mm, real).realised_mcar.holds
    assert classify(mm, real).everywhere_mar.holds
    cond2 = ConditioningFunction.projection(space, [1], (0,))
    assert not classify_covariate_dependent_mcar(mm, real, cond2).holds
