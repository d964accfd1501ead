"""When is realised MAR *necessary* for L1 to be proportional to L2?

For a fixed pattern m every f_theta factorises as

    f_theta(y) = f1_theta{o(y, m)} * f2_theta{mis(y, m) | o(y, m)}

and, with distinct parameters and positive g_phi(m~|y~), proportionality
of L1(., phi) and L2 for every phi is equivalent to realised MAR as soon
as the conditional family f2_theta(. | o(y~, m~)) is complete.  On a
finite theta grid, completeness becomes the rank condition implemented in
:func:`check_grid_completeness` ("grid-complete").
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any

from .classify import classify_realised_mar
from .errors import TheoremViolation
from .likelihood import fixed_phi_likelihood, ignoring_likelihood, proportionality_constant
from .linalg import bareiss_rank, float_null_vector, float_rank, null_vector
from .model import (
    DiscreteDataModel,
    JointParameterSpace,
    MissingnessModel,
    Pattern,
    Realisation,
    extract_missing,
    extract_observed,
    point_label,
)
from .numeric import PROP_TOL, all_exact, close, fsum_exact, rel_close


@dataclass(frozen=True)
class PatternFactorization:
    """Marginal of o(Y, m) and conditional of mis(Y, m) given o(Y, m), per theta.

    ``f2[theta][obs]`` is ``None`` where ``f1[theta][obs]`` is zero.
    """

    pattern: Pattern
    mis_values: tuple
    f1: dict
    f2: dict

    def conditional(self, theta, obs) -> dict | None:
        return self.f2[theta].get(tuple(obs))


def factorize_by_pattern(dm: DiscreteDataModel, m) -> PatternFactorization:
    m = Pattern.parse(m)
    space = dm.space
    mis_values = tuple(
        itertools.product(*(space.coordinates[j].support for j in m.missing_positions))
    )
    keys = [(extract_observed(y, m).observed_values, extract_missing(y, m)) for y in space.points]
    f1, f2 = {}, {}
    for theta in dm.theta_grid:
        table = dm.tables[theta]
        joint: dict = {}
        for (obs, mis), p in zip(keys, table):
            joint.setdefault(obs, {})[mis] = p
        f1[theta] = {obs: fsum_exact(d.values()) for obs, d in joint.items()}
        f2[theta] = {
            obs: None if f1[theta][obs] == 0 else {mis: p / f1[theta][obs] for mis, p in d.items()}
            for obs, d in joint.items()
        }
    return PatternFactorization(m, mis_values, f1, f2)


def factorization_holds(dm: DiscreteDataModel, fact: PatternFactorization, tol: float = 1e-12) -> bool:
    """f_theta(y) == f1 * f2 at every theta and y (0 where the marginal is 0)."""
    for theta in dm.theta_grid:
        for y, p in zip(dm.space.points, dm.tables[theta]):
            obs = extract_observed(y, fact.pattern).observed_values
            mis = extract_missing(y, fact.pattern)
            cond = fact.f2[theta][obs]
            rebuilt = 0 if cond is None else fact.f1[theta][obs] * cond[mis]
            if not close(p, rebuilt, tol):
                return False
    return True


@dataclass
class CompletenessReport:
    n_rows: int
    n_cols: int
    rank: int
    grid_complete: bool
    witness: list | None = None
    rows: tuple = ()
    note: str = ""

    def witness_ok(self, fact: PatternFactorization, obs, tol: float = 1e-9) -> bool:
        if self.witness is None:
            return True
        if all(h == 0 for h in self.witness):
            return False
        for theta in self.rows:
            cond = fact.conditional(theta, obs)
            s = fsum_exact(h * cond[mis] for h, mis in zip(self.witness, fact.mis_values))
            if not close(s, 0, tol):
                return False
        return True


def completeness_matrix(fact: PatternFactorization, obs) -> tuple[list[list], tuple]:
    obs = tuple(obs)
    rows, thetas = [], []
    for theta, by_obs in fact.f2.items():
        cond = by_obs.get(obs)
        if cond is None:
            continue
        rows.append([cond[mis] for mis in fact.mis_values])
        thetas.append(theta)
    return rows, tuple(thetas)


def check_grid_completeness(fact: PatternFactorization, obs) -> CompletenessReport:
    """Are the columns (one per missing value) independent over the theta grid?

    Rows come from the theta points at which ``obs`` has positive marginal
    probability; the other points carry no constraint.
    """
    if not fact.mis_values or fact.mis_values == ((),):
        return CompletenessReport(0, 0, 0, True, note="nothing missing: trivially complete")
    matrix, thetas = completeness_matrix(fact, obs)
    n_cols = len(fact.mis_values)
    if not matrix:
        return CompletenessReport(
            0, n_cols, 0, False, note="observed value has zero probability at every theta"
        )
    if all(all_exact(r) for r in matrix):
        rank = bareiss_rank(matrix)
        witness = None if rank == n_cols else null_vector(matrix)
    else:
        rank = float_rank(matrix)
        witness = None if rank == n_cols else float_null_vector(matrix)
    return CompletenessReport(len(matrix), n_cols, rank, rank == n_cols, witness, thetas)


@dataclass
class AppendixReport:
    distinct: bool
    grid_complete: bool
    positivity: bool
    realised_mar: bool
    proportional_all_phi: bool
    proportional_per_phi: dict
    q_values: dict
    q_matches_g: bool | None
    completeness: CompletenessReport | None = None

    @property
    def hypotheses_hold(self) -> bool:
        return self.distinct and self.grid_complete and self.positivity

    @property
    def biconditional_holds(self) -> bool:
        return self.proportional_all_phi == self.realised_mar


def q_value(fact, dm, mm, real: Realisation, phi, tol: float = PROP_TOL):
    """The theta-invariant value of sum_y f2_theta(mis|obs) g_phi(m~|y) r(y), or None."""
    obs = real.record.observed_values
    idx = [i for i, y in enumerate(dm.space.points)
           if extract_observed(y, real.m_tilde).observed_values == obs]
    g = mm.column(phi, real.m_tilde)
    values = []
    for theta in dm.theta_grid:
        cond = fact.f2[theta].get(obs)
        if cond is None:
            continue
        values.append(fsum_exact(cond[extract_missing(dm.space.points[i], real.m_tilde)] * g[i] for i in idx))
    if not values:
        return None
    if all(rel_close(v, values[0], tol) or (v == 0 and values[0] == 0) for v in values):
        return values[0]
    return None


def verify_appendix_theorem(
    dm: DiscreteDataModel,
    mm: MissingnessModel,
    joint_space: JointParameterSpace,
    real: Realisation,
    tol: float = PROP_TOL,
    strict: bool = True,
) -> AppendixReport:
    """Evaluate both sides of "L1(., phi) proportional to L2 for every phi  <=>  realised MAR"."""
    fact = factorize_by_pattern(dm, real.m_tilde)
    obs = real.record.observed_values
    comp = check_grid_completeness(fact, obs)
    yi = dm.space.index(real.y_tilde)
    positivity = all(mm.g(p, real.m_tilde, yi) > 0 for p in mm.phi_grid)
    mar = classify_realised_mar(mm, real, min(tol, 1e-12)).holds
    l2 = ignoring_likelihood(dm, real)
    per_phi = {}
    for p in mm.phi_grid:
        c = proportionality_constant(fixed_phi_likelihood(dm, mm, joint_space, real, p), l2, tol)
        per_phi[p] = c is not None
    prop_all = all(per_phi.values())

    q_values = {p: q_value(fact, dm, mm, real, p, tol) for p in mm.phi_grid}
    q_matches = None
    if prop_all:
        idx = [i for i, y in enumerate(dm.space.points)
               if extract_observed(y, real.m_tilde).observed_values == obs]
        q_matches = all(
            q_values[p] is not None
            and all(close(mm.g(p, real.m_tilde, i), q_values[p], tol) for i in idx)
            for p in mm.phi_grid
        )
    report = AppendixReport(
        distinct=joint_space.is_distinct,
        grid_complete=comp.grid_complete,
        positivity=positivity,
        realised_mar=mar,
        proportional_all_phi=prop_all,
        proportional_per_phi=per_phi,
        q_values=q_values,
        q_matches_g=q_matches,
        completeness=comp,
    )
    if strict and report.hypotheses_hold:
        if not report.biconditional_holds:
            raise TheoremViolation(
                f"necessity theorem violated: proportional={prop_all}, realised MAR={mar}"
            )
        if prop_all and not q_matches:
            raise TheoremViolation("proportionality holds but Q differs from g_phi(m~|y)")
    return report


def describe_phi(report: AppendixReport) -> dict[str, Any]:
    return {point_label(p): ok for p, ok in report.proportional_per_phi.items()}
