"""Small canned instances used in docs, tests and the CLI ``--example`` flag."""

from __future__ import annotations

from fractions import Fraction as F

from .model import (
    DataSpace,
    DiscreteDataModel,
    JointParameterSpace,
    MissingnessModel,
    ModelBundle,
    Pattern,
    Realisation,
)


def bernoulli_unit(theta_grid) -> DiscreteDataModel:
    """One binary coordinate with P(Y = 1) = theta."""
    space = DataSpace.from_supports([(0, 1)], ["Y"])
    return DiscreteDataModel.from_function(space, theta_grid, lambda t, y: t[0] if y[0] == 1 else 1 - t[0])


def mcar_unit(phi_grid) -> MissingnessModel:
    """Each unit observed with probability phi, whatever its value."""
    space = DataSpace.from_supports([(0, 1)], ["Y"])
    return MissingnessModel.from_function(
        space, phi_grid, lambda p, m, y: p[0] if m.bits == (1,) else 1 - p[0]
    )


def two_unit_mcar() -> ModelBundle:
    """Two Bernoulli units, each observed with probability phi; unit 1 seen as 1, unit 2 missing.

    L1(theta, phi) = theta * phi * (1 - phi) and L2(theta) = theta.
    """
    grid_t = [F(1, 4), F(1, 2), F(3, 4)]
    grid_p = [F(1, 4), F(1, 2), F(3, 4)]
    dm = DiscreteDataModel.from_iid(bernoulli_unit(grid_t), 2)
    mm = MissingnessModel.from_iid(mcar_unit(grid_p), 2)
    real = Realisation((1, 0), Pattern.parse("10"))
    return ModelBundle(dm.space, dm, mm, JointParameterSpace.full(dm, mm), real)


def observe_depends_on_value(theta_grid=(F(1, 2),)) -> ModelBundle:
    """One binary Y, observed with probability 1/2 if Y = 0 and 4/5 if Y = 1; Y seen as 1."""
    dm = bernoulli_unit(list(theta_grid))
    obs = {0: F(1, 2), 1: F(4, 5)}
    mm = MissingnessModel.from_function(
        dm.space, [F(1)], lambda p, m, y: obs[y[0]] if m.bits == (1,) else 1 - obs[y[0]]
    )
    real = Realisation((1,), Pattern.parse("1"))
    return ModelBundle(dm.space, dm, mm, JointParameterSpace.full(dm, mm), real)


def fully_observed_value_dependent(n_units: int = 2) -> ModelBundle:
    """A variable X on ``n_units`` units, never actually missing, whose chance of
    being observed depends on X itself (1/2 if X = 0, 4/5 if X = 1)."""
    space = DataSpace.from_supports([(0, 1)], ["X"])
    unit_dm = DiscreteDataModel.from_function(
        space, [F(1, 3), F(2, 3)], lambda t, y: t[0] if y[0] == 1 else 1 - t[0]
    )
    obs = {0: F(1, 2), 1: F(4, 5)}
    unit_mm = MissingnessModel.from_function(
        space, [F(0)], lambda p, m, y: obs[y[0]] if m.bits == (1,) else 1 - obs[y[0]]
    )
    dm = DiscreteDataModel.from_iid(unit_dm, n_units)
    mm = MissingnessModel.from_iid(unit_mm, n_units)
    y = tuple(i % 2 for i in range(n_units))
    real = Realisation(y, Pattern((1,) * n_units))
    return ModelBundle(dm.space, dm, mm, JointParameterSpace.full(dm, mm), real)


def single_theta_value_dependent() -> ModelBundle:
    """A one-point theta grid with a value-dependent mechanism and Y missing.

    L2 is identically 1 and L1(., phi) is constant in theta (there is only
    one theta), so the likelihoods are proportional although realised MAR
    fails.
    """
    dm = bernoulli_unit([F(1, 2)])
    cols = {(F(1, 4),): (F(1, 4), F(3, 4)), (F(1, 2),): (F(1, 2), F(1, 4))}
    mm = MissingnessModel(
        dm.space,
        list(cols),
        {p: {Pattern((1,)): c, Pattern((0,)): tuple(1 - v for v in c)} for p, c in cols.items()},
    )
    real = Realisation((0,), Pattern.parse("0"))
    return ModelBundle(dm.space, dm, mm, JointParameterSpace.full(dm, mm), real)


def four_coordinate_example() -> ModelBundle:
    """Two units of (X, Z) with X in {4, 10} and Z in {2, 3}; the realised vector
    is (10, 3, 4, 2) with Z missing on the first unit."""
    unit_space = DataSpace.from_supports([(4, 10), (2, 3)], ["X", "Z"])
    z3 = {10: F(2, 3), 4: F(1, 3)}

    def f(t, y):
        x, z = y
        px = t[0] if x == 10 else 1 - t[0]
        return px * (z3[x] if z == 3 else 1 - z3[x])

    unit_dm = DiscreteDataModel.from_function(unit_space, [F(1, 4), F(1, 2), F(3, 4)], f)

    def g(p, m, y):
        # X always seen; Z seen with a probability that depends on X only
        seen = F(1, 2) if y[0] == 10 else p[0]
        return {(1, 1): seen, (1, 0): 1 - seen}.get(m.bits, 0)

    unit_mm = MissingnessModel.from_function(unit_space, [F(1, 2), F(3, 4)], g, patterns=["11", "10"])
    dm = DiscreteDataModel.from_iid(unit_dm, 2)
    mm = MissingnessModel.from_iid(unit_mm, 2)
    real = Realisation((10, 3, 4, 2), Pattern.parse("1011"))
    return ModelBundle(dm.space, dm, mm, JointParameterSpace.full(dm, mm), real)


EXAMPLES = {
    "two-unit-mcar": two_unit_mcar,
    "observe-depends-on-value": observe_depends_on_value,
    "fully-observed-value-dependent": fully_observed_value_dependent,
    "single-theta-value-dependent": single_theta_value_dependent,
    "four-coordinate": four_coordinate_example,
}
