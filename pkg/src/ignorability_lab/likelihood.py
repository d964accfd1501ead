"""Likelihood objects on parameter grids and the factorisation check.

Naming follows the usual objects for a realisation (y~, m~):

* ``joint_likelihood``     sum_y f_theta(y) g_phi(m~|y) r(y)   over (theta, phi)
* ``ignoring_likelihood``  sum_y f_theta(y) r(y)               over theta
* ``fixed_phi_likelihood`` the joint likelihood at one phi, zero off the joint space
* ``profile_likelihood``   pointwise max over phi of the fixed-phi likelihood
* ``l5``                   g_phi(m~ | y~)                       over phi

where r(y) is 1 when y agrees with the observed part of y~.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .classify import classify_realised_mar
from .errors import DomainError, PreconditionError, StructuralError, TheoremViolation, UsageError
from .model import (
    ConditioningFunction,
    DiscreteDataModel,
    JointParameterSpace,
    MissingnessModel,
    Realisation,
    as_point,
    compatible_indices,
    point_label,
)
from .numeric import PROP_TOL, Number, all_exact, fsum_exact, rel_close

FISHER_CUTOFF = Fraction(1, 15)
ROYALL_CUTOFF = Fraction(1, 32)


@dataclass(frozen=True)
class GridFunction:
    """Nonnegative values aligned with a duplicate-free list of grid points."""

    domain: tuple
    values: tuple

    def __post_init__(self):
        domain, values = tuple(self.domain), tuple(self.values)
        if len(domain) != len(values):
            raise StructuralError("grid function domain and values differ in length")
        if len(set(domain)) != len(domain):
            raise StructuralError("grid function domain has duplicates")
        for v in values:
            if v < 0 or v != v or v == float("inf"):
                raise DomainError(f"grid function value {v} is not finite and nonnegative")
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "values", values)

    def __getitem__(self, point):
        try:
            return self.values[self.domain.index(point)]
        except ValueError:
            point = as_point(point)
            return self.values[self.domain.index(point)]

    def __len__(self):
        return len(self.domain)

    def items(self):
        return zip(self.domain, self.values)

    def max(self) -> Number:
        return max(self.values)

    def argmax(self) -> tuple[object, int]:
        """First maximising point and the number of tied maxima."""
        best = self.max()
        hits = [i for i, v in enumerate(self.values) if v == best]
        return self.domain[hits[0]], len(hits)

    def scaled(self, c: Number) -> GridFunction:
        return GridFunction(self.domain, tuple(c * v for v in self.values))

    @property
    def is_zero(self) -> bool:
        return all(v == 0 for v in self.values)


def proportionality_constant(u: GridFunction, v: GridFunction, tol: float = PROP_TOL):
    """Return c with u = c * v on the common domain, or ``None``.

    u and v are proportional when they vanish on the same points and the
    ratio u/v is constant on the rest.  Two identically zero functions are
    proportional with c = 0.
    """
    if tuple(u.domain) != tuple(v.domain):
        raise StructuralError("proportionality needs functions on the same domain")
    ratio = None
    for a, b in zip(u.values, v.values):
        za, zb = a == 0, b == 0
        if za != zb:
            return None
        if za:
            continue
        r = a / b
        if ratio is None:
            ratio = r
        elif not rel_close(r, ratio, tol):
            return None
    return 0 if ratio is None else ratio


def proportional(u: GridFunction, v: GridFunction, tol: float = PROP_TOL) -> bool:
    return proportionality_constant(u, v, tol) is not None


def _record_indices(dm: DiscreteDataModel, real: Realisation) -> list[int]:
    if dm.space.n_coords != len(real.m_tilde):
        raise StructuralError("realisation does not match the data space")
    dm.space.index(real.y_tilde)
    return compatible_indices(dm.space, real.record)


def _joint_value(dm, mm, theta, phi, real, idx) -> Number:
    f = dm.tables[theta]
    g = mm.column(phi, real.m_tilde)
    return fsum_exact(f[i] * g[i] for i in idx)


def joint_likelihood(
    dm: DiscreteDataModel, mm: MissingnessModel, joint_space: JointParameterSpace, real: Realisation
) -> GridFunction:
    if dm.space != mm.space:
        raise StructuralError("data and missingness models live on different spaces")
    pairs = joint_space.pairs
    if not pairs:
        raise UsageError("joint parameter space is empty")
    idx = _record_indices(dm, real)
    return GridFunction(
        tuple(pairs), tuple(_joint_value(dm, mm, t, p, real, idx) for t, p in pairs)
    )


def ignoring_likelihood(dm: DiscreteDataModel, real: Realisation) -> GridFunction:
    idx = _record_indices(dm, real)
    return GridFunction(
        dm.theta_grid, tuple(fsum_exact(dm.tables[t][i] for i in idx) for t in dm.theta_grid)
    )


def fixed_phi_likelihood(
    dm: DiscreteDataModel,
    mm: MissingnessModel,
    joint_space: JointParameterSpace,
    real: Realisation,
    phi,
) -> GridFunction:
    phi = as_point(phi)
    if phi not in mm.kernels:
        raise UsageError(f"phi={point_label(phi)} is not on the phi grid")
    idx = _record_indices(dm, real)
    values = tuple(
        _joint_value(dm, mm, t, phi, real, idx) if joint_space.contains(t, phi) else 0
        for t in dm.theta_grid
    )
    return GridFunction(dm.theta_grid, values)


def profile_likelihood(
    dm: DiscreteDataModel, mm: MissingnessModel, joint_space: JointParameterSpace, real: Realisation
) -> GridFunction:
    curves = [fixed_phi_likelihood(dm, mm, joint_space, real, p).values for p in mm.phi_grid]
    return GridFunction(dm.theta_grid, tuple(max(col) for col in zip(*curves)))


def l5(mm: MissingnessModel, real: Realisation) -> GridFunction:
    """g_phi(m~ | y~) over the phi grid.  Needs the full realised y~."""
    if real.y_tilde is None or any(v is None for v in real.y_tilde):
        raise UsageError("the mechanism factor needs the complete realised data vector")
    i = mm.space.index(real.y_tilde)
    return GridFunction(mm.phi_grid, tuple(mm.g(p, real.m_tilde, i) for p in mm.phi_grid))


def likelihood_object(name: str, dm, mm, joint_space, real, phi=None) -> GridFunction:
    """Dispatch by CLI name: l1..l5 or ``profile`` (an alias of l4)."""
    if name == "l1":
        return joint_likelihood(dm, mm, joint_space, real)
    if name == "l2":
        return ignoring_likelihood(dm, real)
    if name == "l3":
        if phi is None:
            raise UsageError("the fixed-phi likelihood needs a phi value")
        return fixed_phi_likelihood(dm, mm, joint_space, real, phi)
    if name in ("l4", "profile"):
        return profile_likelihood(dm, mm, joint_space, real)
    if name == "l5":
        return l5(mm, real)
    raise UsageError(f"unknown likelihood object {name!r}")


# --------------------------------------------------------------------------
# factorisation check
# --------------------------------------------------------------------------


@dataclass
class Theorem1Report:
    factorises: bool
    factorisation_witness: tuple | None
    proportional_fixed_phi: dict
    constants: dict
    proportional_profile: bool
    profile_constant: Number | None
    realised_mar: bool
    distinct: bool
    positivity: bool
    positive_phi: tuple = ()

    @property
    def hypotheses_hold(self) -> bool:
        return self.realised_mar and self.distinct and self.positivity


def verify_theorem1(
    dm: DiscreteDataModel,
    mm: MissingnessModel,
    joint_space: JointParameterSpace,
    real: Realisation,
    tol: float = PROP_TOL,
    strict: bool = True,
) -> Theorem1Report:
    """Measure the hypotheses, check all three conclusions.

    With ``strict`` a conclusion failing under its hypotheses raises
    :class:`TheoremViolation`.
    """
    mar = classify_realised_mar(mm, real, min(tol, 1e-12)).holds
    distinct = joint_space.is_distinct
    f5 = l5(mm, real)
    f2 = ignoring_likelihood(dm, real)
    f1 = joint_likelihood(dm, mm, joint_space, real)
    positive_phi = tuple(p for p, v in f5.items() if v > 0)
    positivity = bool(positive_phi)

    witness = None
    for (t, p), v in f1.items():
        if not rel_close(v, f5[p] * f2[t], tol):
            witness = (t, p)
            break
    factorises = witness is None

    prop_fixed: dict = {}
    constants: dict = {}
    for p in mm.phi_grid:
        if p not in positive_phi:
            prop_fixed[p] = None
            constants[p] = None
            continue
        c = proportionality_constant(fixed_phi_likelihood(dm, mm, joint_space, real, p), f2, tol)
        prop_fixed[p] = c is not None
        constants[p] = c

    if positivity:
        prof_c = proportionality_constant(profile_likelihood(dm, mm, joint_space, real), f2, tol)
    else:
        prof_c = None
    report = Theorem1Report(
        factorises=factorises,
        factorisation_witness=witness,
        proportional_fixed_phi=prop_fixed,
        constants=constants,
        proportional_profile=prof_c is not None,
        profile_constant=prof_c,
        realised_mar=mar,
        distinct=distinct,
        positivity=positivity,
        positive_phi=positive_phi,
    )
    if strict and mar and distinct:
        failed = []
        if not factorises:
            failed.append(f"(i) at {witness}")
        failed += [f"(ii) at phi={point_label(p)}" for p, ok in prop_fixed.items() if ok is False]
        if positivity and not report.proportional_profile:
            failed.append("(iii)")
        if failed:
            raise TheoremViolation("factorisation conclusions failed: " + ", ".join(failed))
    return report


# --------------------------------------------------------------------------
# conditioning on X = b(Y)
# --------------------------------------------------------------------------


def condition_data_model(dm: DiscreteDataModel, cond: ConditioningFunction, x=None) -> DiscreteDataModel:
    """Replace f_theta(y) by f_theta(y | b(y) = x), renormalised on the fibre.

    A fibre equal to the whole space returns ``dm`` itself, so a constant b
    reproduces unconditional computations bit for bit.
    """
    if cond.space != dm.space:
        raise StructuralError("conditioning function is defined on a different space")
    fiber = set(cond.fiber(x))
    if len(fiber) == dm.space.size:
        return dm
    tables = {}
    for t in dm.theta_grid:
        f = dm.tables[t]
        mass = fsum_exact(f[i] for i in fiber)
        if mass == 0:
            raise DomainError(
                f"conditioning event b(Y) = {cond.x_tilde if x is None else x!r} has probability "
                f"zero at theta={point_label(t)}"
            )
        tables[t] = tuple(f[i] / mass if i in fiber else 0 * f[i] for i in range(dm.space.size))
    return DiscreteDataModel(dm.space, dm.theta_grid, tables)


def observed_levels(cond: ConditioningFunction, real: Realisation) -> list:
    """The values b(y) can take over vectors compatible with the realisation."""
    seen = []
    for i in compatible_indices(cond.space, real.record):
        lab = cond.labels[i]
        if lab not in seen:
            seen.append(lab)
    return seen


def check_conditional_applicability(
    dm: DiscreteDataModel, real: Realisation, cond: ConditioningFunction, tol: float = PROP_TOL
) -> bool:
    """Either x~ is determined by the observed data, or the conditional
    ignoring likelihood does not depend on the unobserved part of x~.

    Returns True when x~ is observed; raises :class:`PreconditionError`
    when neither alternative holds.
    """
    levels = observed_levels(cond, real)
    if levels == [cond.x_tilde]:
        return True
    if cond.x_tilde not in levels:
        raise PreconditionError("x~ is not attainable by any vector compatible with the realisation")
    base = ignoring_likelihood(condition_data_model(dm, cond), real)
    for x in levels:
        if x == cond.x_tilde:
            continue
        try:
            alt = ignoring_likelihood(condition_data_model(dm, cond, x), real)
        except DomainError:
            continue
        for t in dm.theta_grid:
            if not rel_close(alt[t], base[t], tol):
                raise PreconditionError(
                    f"x~ is not determined by the observed data and the conditional likelihood at "
                    f"theta={point_label(t)} changes from {base[t]} to {alt[t]} when x~ is replaced by {x!r}"
                )
    return False


def joint_likelihood_given_x(dm, mm, joint_space, real, cond) -> GridFunction:
    check_conditional_applicability(dm, real, cond)
    return joint_likelihood(condition_data_model(dm, cond), mm, joint_space, real)


def ignoring_likelihood_given_x(dm, real, cond) -> GridFunction:
    check_conditional_applicability(dm, real, cond)
    return ignoring_likelihood(condition_data_model(dm, cond), real)


def fixed_phi_likelihood_given_x(dm, mm, joint_space, real, phi, cond) -> GridFunction:
    check_conditional_applicability(dm, real, cond)
    return fixed_phi_likelihood(condition_data_model(dm, cond), mm, joint_space, real, phi)


def profile_likelihood_given_x(dm, mm, joint_space, real, cond) -> GridFunction:
    check_conditional_applicability(dm, real, cond)
    return profile_likelihood(condition_data_model(dm, cond), mm, joint_space, real)


def verify_theorem1_given_x(dm, mm, joint_space, real, cond, tol: float = PROP_TOL) -> Theorem1Report:
    check_conditional_applicability(dm, real, cond)
    return verify_theorem1(condition_data_model(dm, cond), mm, joint_space, real, tol)


# --------------------------------------------------------------------------
# nuisance elimination and likelihood intervals
# --------------------------------------------------------------------------


def profile_out_nuisance(gf: GridFunction, keep: Sequence[int] = (0,)) -> GridFunction:
    """Maximise over the components of each grid point not listed in ``keep``."""
    keep = tuple(keep)
    best: dict = {}
    for point, v in gf.items():
        key = tuple(point[j] for j in keep)
        if key not in best or v > best[key]:
            best[key] = v
    return GridFunction(tuple(best), tuple(best.values()))


def likelihood_interval(gf: GridFunction, cutoff: Number = FISHER_CUTOFF) -> list:
    """Grid points whose normalised likelihood exceeds ``cutoff``.

    On a grid this is a point set rather than an interval of the real line.
    """
    top = gf.max()
    if top == 0:
        raise DomainError("likelihood is identically zero; no interval exists")
    return [p for p, v in gf.items() if v / top > cutoff]


def normalised(gf: GridFunction) -> GridFunction:
    top = gf.max()
    if top == 0:
        raise DomainError("cannot normalise an identically zero likelihood")
    return GridFunction(gf.domain, tuple(v / top for v in gf.values))


def is_exact_function(gf: GridFunction) -> bool:
    return all_exact(gf.values)
