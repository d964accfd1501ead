import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from ignorability_lab import catalog
from ignorability_lab.bayes import (
    Prior,
    central_credible_set,
    hpd_set,
    posterior_ignoring,
    posterior_joint,
    posterior_mean,
    theta_marginal,
    verify_theorem2,
)
from ignorability_lab.errors import StructuralError
from ignorability_lab.model import JointParameterSpace
from ignorability_lab.random_models import random_independent_prior, random_mar_bundle

Q = (F(1, 4),), (F(1, 2),), (F(3, 4),)


def test_canonical_posterior():
    # hand computation: normalise (1/4, 1/2, 3/4)
    ex = catalog.two_unit_mcar()
    prior = Prior.uniform(ex.data_model.theta_grid, ex.missingness_model.phi_grid)
    r = verify_theorem2(ex.data_model, ex.missingness_model, ex.joint_space, ex.realisation, prior)
    assert [r.joint_marginal[t] for t in Q] == [F(1, 6), F(1, 3), F(1, 2)]
    assert r.ignoring == r.joint_marginal
    assert r.tv == 0
    assert r.joint_mean == F(1, 4) / 6 + F(1, 2) / 3 + F(3, 4) / 2


@given(st.integers(0, 10**9))
def test_theorem2_random(seed):
    rng = random.Random(seed)
    b = random_mar_bundle(rng)
    prior = random_independent_prior(rng, b.data_model, b.missingness_model)
    r = verify_theorem2(b.data_model, b.missingness_model, b.joint_space, b.realisation, prior)
    assert r.hypotheses_hold and r.tv == 0
    y, bits = b.realisation.y_tilde, b.realisation.m_tilde.bits
    assert r.joint_marginal == oracles.joint_theta_posterior(b.data_model, b.missingness_model, y, bits, prior.table)


def test_dependent_prior_breaks_equality():
    ex = catalog.two_unit_mcar()
    dm, mm = ex.data_model, ex.missingness_model
    table = {(t, p): (F(4) if i == j else F(1)) for i, t in enumerate(dm.theta_grid) for j, p in enumerate(mm.phi_grid)}
    total = sum(table.values())
    prior = Prior({k: v / total for k, v in table.items()})
    assert not prior.is_independent()
    r = verify_theorem2(dm, mm, ex.joint_space, ex.realisation, prior)
    assert r.tv > 0
    p_theta = prior.theta_margin()
    assert r.ignoring == oracles.ignoring_posterior(dm, (1, 0), (1, 0), p_theta)


def test_prior_outside_joint_space_rejected():
    ex = catalog.two_unit_mcar()
    dm, mm = ex.data_model, ex.missingness_model
    js = JointParameterSpace(dm.theta_grid, mm.phi_grid, [(dm.theta_grid[0], mm.phi_grid[0])])
    prior = Prior.uniform(dm.theta_grid, mm.phi_grid)
    with pytest.raises(StructuralError):
        posterior_joint(dm, mm, js, ex.realisation, prior)


def test_credible_sets():
    ex = catalog.two_unit_mcar()
    prior = Prior.uniform(ex.data_model.theta_grid, ex.missingness_model.phi_grid)
    post = posterior_ignoring(ex.data_model, ex.realisation, prior.theta_margin())
    s, mass = hpd_set(post, F(1, 2))
    assert s == [Q[2]] and mass == F(1, 2)
    s, mass = hpd_set(post, F(3, 4))
    assert s == [Q[1], Q[2]] and mass == F(5, 6)
    s, mass = central_credible_set(post, F(1, 2))
    assert mass >= F(1, 2)
    joint = theta_marginal(posterior_joint(ex.data_model, ex.missingness_model, ex.joint_space, ex.realisation, prior),
                           ex.data_model.theta_grid)
    assert posterior_mean(joint) == posterior_mean(post)


def test_prior_must_sum_to_one():
    with pytest.raises(Exception):
        Prior({(Q[0], Q[0]): F(1, 2)})
