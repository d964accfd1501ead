import random
from fractions import Fraction as F

from hypothesis import given
from hypothesis import strategies as st

import oracles
from ignorability_lab import catalog
from ignorability_lab.model import ConditioningFunction, DataSpace, DiscreteDataModel, MissingnessModel, Pattern, Realisation
from ignorability_lab.random_models import random_mcar_bundle
from ignorability_lab.sampling import (
    IDENTITY,
    SUM_OBSERVED,
    Statistic,
    correct_conditional_dist,
    distribution_tv,
    potentially_incorrect_dist,
    verify_theorem3,
    verify_theorem3_given_x,
)

HALF = (F(1, 2),)


def test_single_binary_value_dependent():
    # hand computation: (1/2 * 4/5) / (1/2 * 4/5 + 1/2 * 1/2) = 8/13
    ex = catalog.observe_depends_on_value()
    dm, mm = ex.data_model, ex.missingness_model
    cor = correct_conditional_dist(dm, mm, HALF, (F(1),), "1", IDENTITY)
    inc = potentially_incorrect_dist(dm, HALF, "1", IDENTITY)
    assert cor[(1,)] == F(8, 13) and cor[(0,)] == F(5, 13)
    assert inc[(1,)] == F(1, 2)
    assert distribution_tv(cor, inc) == F(3, 26)
    r = verify_theorem3(dm, mm, ex.realisation, IDENTITY)
    assert not r.condition_holds
    assert r.cells[0].tv == F(3, 26)


@given(st.integers(0, 10**9))
def test_theorem3_random_mcar(seed):
    b = random_mcar_bundle(random.Random(seed))
    for t in (IDENTITY, SUM_OBSERVED):
        r = verify_theorem3(b.data_model, b.missingness_model, b.realisation, t)
        assert r.condition_holds
        assert all(c.tv in (None, 0) for c in r.cells)


@given(st.integers(0, 10**9))
def test_correct_dist_matches_oracle(seed):
    b = random_mcar_bundle(random.Random(seed))
    dm, mm = b.data_model, b.missingness_model
    bits = b.realisation.m_tilde.bits
    for theta in dm.theta_grid:
        for phi in mm.phi_grid:
            w = [dm.tables[theta][j] * oracles.g(mm, phi, bits, j) for j in range(dm.space.size)]
            if sum(w) == 0:
                continue
            got = correct_conditional_dist(dm, mm, theta, phi, b.realisation.m_tilde, IDENTITY)
            assert got.outcomes == oracles.law_of_statistic(dm, w, bits, tuple)


def test_statistic_from_table():
    stat = Statistic.from_table("parity", {("1", (0,)): "even", ("1", (1,)): "odd"})
    ex = catalog.observe_depends_on_value()
    d = potentially_incorrect_dist(ex.data_model, HALF, "1", stat)
    assert d.outcomes == {"even": F(1, 2), "odd": F(1, 2)}


def test_conditional_variant():
    # Y1 always seen; Y2 seen with probability depending on Y1 and the realised Y1 = 1
    space = DataSpace.from_supports([(0, 1), (0, 1)])
    dm = DiscreteDataModel(space, [F(1, 3), F(2, 3)], [
        [F(1, 6), F(1, 6), F(1, 3), F(1, 3)],
        [F(1, 12), F(1, 4), F(1, 6), F(1, 2)],
    ])
    seen = {0: F(1, 5), 1: F(3, 5)}
    mm = MissingnessModel.from_function(
        space, [F(1)], lambda p, m, y: seen[y[0]] if m.bits == (1, 1) else (1 - seen[y[0]] if m.bits == (1, 0) else 0),
        patterns=["11", "10"],
    )
    real = Realisation((1, 0), Pattern.parse("10"))
    cond = ConditioningFunction.projection(space, [0], (1,))
    plain = verify_theorem3(dm, mm, real, IDENTITY)
    assert not plain.condition_holds
    r = verify_theorem3_given_x(dm, mm, real, IDENTITY, cond)
    assert r.condition_holds and r.x_observed
    assert all(c.tv == 0 for c in r.cells)
