from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ignorability_lab.errors import DomainError, StructuralError, UsageError
from ignorability_lab.model import (
    DataSpace,
    DiscreteDataModel,
    JointParameterSpace,
    MissingnessModel,
    Pattern,
    Realisation,
    all_patterns,
    extract_missing,
    extract_observed,
    interleave,
)
from ignorability_lab import catalog


def test_extract_observed_four_coordinates():
    # o((10,3,4,2), (1,0,1,1)) = (10,4,2)
    rec = extract_observed((10, 3, 4, 2), Pattern.parse("1011"))
    assert rec.observed_values == (10, 4, 2)
    assert rec.k == 3
    assert extract_missing((10, 3, 4, 2), "1011") == (3,)


def test_pattern_length_mismatch_is_structural():
    with pytest.raises(StructuralError):
        extract_observed((1, 2), Pattern.parse("101"))


def test_pattern_parse_rejects_bad_bits():
    with pytest.raises((UsageError, StructuralError, DomainError, ValueError)):
        Pattern.parse("102")


def test_all_patterns_count():
    assert len(all_patterns(3)) == 8
    assert len(set(all_patterns(3))) == 8


@given(st.lists(st.integers(0, 9), min_size=1, max_size=6), st.data())
def test_interleave_inverts_extraction(y, data):
    bits = data.draw(st.lists(st.integers(0, 1), min_size=len(y), max_size=len(y)))
    m = Pattern(tuple(bits))
    obs = extract_observed(tuple(y), m).observed_values
    mis = extract_missing(tuple(y), m)
    assert len(obs) + len(mis) == len(y)
    assert interleave(obs, mis, m) == tuple(y)


def test_unit_space_product():
    ex = catalog.four_coordinate_example()
    assert ex.space.size == 16
    assert ex.space.n_units == 2
    assert ex.space.split_units((10, 3, 4, 2)) == [(10, 3), (4, 2)]


def test_data_table_must_sum_to_one():
    space = DataSpace.from_supports([(0, 1)])
    with pytest.raises((StructuralError, DomainError)):
        DiscreteDataModel(space, [F(1, 2)], [[F(1, 2), F(1, 3)]])


def test_kernel_columns_must_sum_to_one():
    space = DataSpace.from_supports([(0, 1)])
    kern = {Pattern.parse("1"): (F(1, 2), F(1, 2)), Pattern.parse("0"): (F(1, 2), F(2, 5))}
    with pytest.raises((StructuralError, DomainError)):
        MissingnessModel(space, [F(1, 2)], [kern])


def test_iid_product_tables():
    # hand computation: f(y1, y2) = f1(y1) f1(y2)
    ex = catalog.two_unit_mcar()
    dm = ex.data_model
    for t in dm.theta_grid:
        p = t[0]
        unit = {0: 1 - p, 1: p}
        for y in dm.space.points:
            assert dm.prob(t, y) == unit[y[0]] * unit[y[1]]


def test_iid_kernels_multiply():
    ex = catalog.two_unit_mcar()
    mm = ex.missingness_model
    for phi in mm.phi_grid:
        p = phi[0]
        assert mm.g(phi, "10", (1, 0)) == p * (1 - p)
        assert mm.g(phi, "11", (0, 1)) == p * p


def test_realisation_must_be_in_space():
    ex = catalog.two_unit_mcar()
    with pytest.raises((StructuralError, DomainError)):
        ex.data_model.table((F(1, 4),))[ex.space.index((2, 0))]


def test_joint_space_distinct_and_restricted():
    ex = catalog.two_unit_mcar()
    dm, mm = ex.data_model, ex.missingness_model
    full = JointParameterSpace.full(dm, mm)
    assert full.is_distinct
    diag = JointParameterSpace(dm.theta_grid, mm.phi_grid, [(t, p) for t, p in zip(dm.theta_grid, mm.phi_grid)])
    assert not diag.is_distinct
    assert diag.contains(dm.theta_grid[0], mm.phi_grid[0])
    assert not diag.contains(dm.theta_grid[0], mm.phi_grid[1])


def test_realisation_record():
    r = Realisation((10, 3, 4, 2), Pattern.parse("1011"))
    assert r.record.observed_values == (10, 4, 2)


def test_duplicate_grid_rejected():
    space = DataSpace.from_supports([(0, 1)])
    with pytest.raises(StructuralError):
        DiscreteDataModel(space, [F(1, 2), F(1, 2)], [[F(1, 2), F(1, 2)]] * 2)
