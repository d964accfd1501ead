"""Sampling distributions of a statistic t{o(Y, m~), m~} given M = m~.

The *correct conditional* distribution weights each y by
f_theta(y) g_phi(m~ | y); the *potentially incorrect* one drops the
mechanism and weights by f_theta(y) alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Mapping, Sequence

from .classify import classify_covariate_dependent_mcar, classify_realised_mcar
from .errors import DomainError, PreconditionError, TheoremViolation, UsageError
from .likelihood import condition_data_model, observed_levels
from .model import (
    ConditioningFunction,
    DiscreteDataModel,
    MissingnessModel,
    ObservedRecord,
    Pattern,
    Realisation,
    as_point,
    extract_observed,
    point_label,
)
from .numeric import EQ_TOL, Number, all_exact, close, fsum_exact


@dataclass(frozen=True)
class Statistic:
    """A named map from an observed record to a finite outcome label."""

    name: str
    fn: Callable[[ObservedRecord], Hashable] = field(compare=False)

    def __call__(self, record: ObservedRecord) -> Hashable:
        return self.fn(record)

    @classmethod
    def from_table(cls, name: str, table: Mapping) -> Statistic:
        """``table`` maps (pattern string, observed tuple) to labels."""
        lookup = {(str(Pattern.parse(m)), tuple(o)): lab for (m, o), lab in table.items()}

        def fn(record: ObservedRecord):
            key = (str(record.m_tilde), tuple(record.observed_values))
            try:
                return lookup[key]
            except KeyError:
                raise DomainError(f"statistic {name!r} is undefined at {key}") from None

        return cls(name, fn)


IDENTITY = Statistic("identity", lambda r: tuple(r.observed_values))
SUM_OBSERVED = Statistic("sum_observed", lambda r: sum(r.observed_values))
COUNT_OBSERVED = Statistic("count_observed", lambda r: r.k)
BUILTIN_STATISTICS = {s.name: s for s in (IDENTITY, SUM_OBSERVED, COUNT_OBSERVED)}


def get_statistic(name: str) -> Statistic:
    try:
        return BUILTIN_STATISTICS[name]
    except KeyError:
        raise UsageError(
            f"unknown statistic {name!r}; built-ins are {', '.join(BUILTIN_STATISTICS)}"
        ) from None


@dataclass(frozen=True)
class SamplingDistribution:
    outcomes: dict
    pattern: Pattern
    source: str  # "correct" or "potentially_incorrect"
    x_tilde: Hashable | None = None

    def __getitem__(self, label):
        return self.outcomes.get(label, 0)


def _push_forward(dm: DiscreteDataModel, weights: Sequence[Number], m: Pattern, t: Statistic, what: str):
    total = fsum_exact(weights)
    if total == 0:
        raise DomainError(f"{what}: the conditioning event M = {m} has probability zero")
    acc: dict = {}
    for y, w in zip(dm.space.points, weights):
        if w == 0:
            continue
        acc.setdefault(t(extract_observed(y, m)), []).append(w)
    return {lab: fsum_exact(ws) / total for lab, ws in acc.items()}


def correct_conditional_dist(
    dm: DiscreteDataModel, mm: MissingnessModel, theta, phi, m, t: Statistic
) -> SamplingDistribution:
    m = Pattern.parse(m)
    f = dm.table(theta)
    g = mm.column(phi, m)
    if len(set(g)) == 1 and g[0] != 0:
        # g(m|y) identical for all y cancels between numerator and denominator
        weights = f
    else:
        weights = tuple(a * b for a, b in zip(f, g))
    where = f"theta={point_label(as_point(theta))}, phi={point_label(as_point(phi))}"
    return SamplingDistribution(_push_forward(dm, weights, m, t, where), m, "correct")


def potentially_incorrect_dist(dm: DiscreteDataModel, theta, m, t: Statistic) -> SamplingDistribution:
    m = Pattern.parse(m)
    f = dm.table(theta)
    where = f"theta={point_label(as_point(theta))}"
    return SamplingDistribution(_push_forward(dm, f, m, t, where), m, "potentially_incorrect")


def distribution_tv(p: SamplingDistribution, q: SamplingDistribution) -> Number:
    keys = list(p.outcomes) + [k for k in q.outcomes if k not in p.outcomes]
    return fsum_exact(abs(p[k] - q[k]) for k in keys) / 2


def positivity(dm: DiscreteDataModel, mm: MissingnessModel, theta, phi, m) -> bool:
    """Is there a y with f_theta(y) g_phi(m | y) > 0?"""
    f, g = dm.table(theta), mm.column(phi, m)
    return any(a * b > 0 for a, b in zip(f, g))


@dataclass
class Theorem3Cell:
    theta: tuple
    phi: tuple
    tv: Number | None  # None when the positivity side condition fails


@dataclass
class Theorem3Report:
    condition_holds: bool  # realised MCAR, or the fibre-wise condition when conditioning
    cells: list
    conditional: bool = False
    x_observed: bool | None = None

    @property
    def skipped(self) -> list:
        return [c for c in self.cells if c.tv is None]

    @property
    def max_tv(self) -> Number:
        tvs = [c.tv for c in self.cells if c.tv is not None]
        return max(tvs) if tvs else 0


def verify_theorem3(
    dm: DiscreteDataModel,
    mm: MissingnessModel,
    real: Realisation,
    t: Statistic,
    theta_grid: Sequence | None = None,
    phi_grid: Sequence | None = None,
    tol: float = EQ_TOL,
    strict: bool = True,
) -> Theorem3Report:
    theta_grid = [as_point(p) for p in (theta_grid or dm.theta_grid)]
    phi_grid = [as_point(p) for p in (phi_grid or mm.phi_grid)]
    mcar = classify_realised_mcar(mm, real, tol).holds
    cells = _cells(dm, mm, real.m_tilde, t, theta_grid, phi_grid)
    report = Theorem3Report(mcar, cells)
    if strict and mcar:
        _assert_equal(report, tol, "realised MCAR")
    return report


def _cells(dm, mm, m, t, theta_grid, phi_grid) -> list:
    cells = []
    for theta in theta_grid:
        incorrect = None
        for phi in phi_grid:
            if not positivity(dm, mm, theta, phi, m):
                cells.append(Theorem3Cell(theta, phi, None))
                continue
            if incorrect is None:
                incorrect = potentially_incorrect_dist(dm, theta, m, t)
            correct = correct_conditional_dist(dm, mm, theta, phi, m, t)
            cells.append(Theorem3Cell(theta, phi, distribution_tv(correct, incorrect)))
    return cells


def _assert_equal(report: Theorem3Report, tol: float, what: str):
    for c in report.cells:
        if c.tv is None:
            continue
        exact = all_exact([c.tv])
        if (exact and c.tv != 0) or (not exact and not close(c.tv, 0, tol)):
            raise TheoremViolation(
                f"sampling distributions differ (TV={c.tv}) at theta={point_label(c.theta)}, "
                f"phi={point_label(c.phi)} although {what} holds"
            )


# --------------------------------------------------------------------------
# conditioning on X = b(Y) as well as M = m~
# --------------------------------------------------------------------------


def check_sampling_applicability(
    dm: DiscreteDataModel, real: Realisation, cond: ConditioningFunction, t: Statistic
) -> bool:
    """x~ observed, or the potentially incorrect distribution given X does not
    depend on the unobserved part of x~.  Raises PreconditionError otherwise."""
    levels = observed_levels(cond, real)
    if levels == [cond.x_tilde]:
        return True
    if cond.x_tilde not in levels:
        raise PreconditionError("x~ is not attainable by any vector compatible with the realisation")
    base_dm = condition_data_model(dm, cond)
    for x in levels:
        if x == cond.x_tilde:
            continue
        try:
            alt_dm = condition_data_model(dm, cond, x)
        except DomainError:
            continue
        for theta in dm.theta_grid:
            a = potentially_incorrect_dist(base_dm, theta, real.m_tilde, t)
            b = potentially_incorrect_dist(alt_dm, theta, real.m_tilde, t)
            if not close(distribution_tv(a, b), 0):
                raise PreconditionError(
                    f"x~ is unobserved and the distribution of {t.name} given X depends on it "
                    f"(theta={point_label(theta)}, alternative x={x!r})"
                )
    return False


def correct_conditional_dist_given_x(dm, mm, theta, phi, real: Realisation, t, cond) -> SamplingDistribution:
    check_sampling_applicability(dm, real, cond, t)
    d = correct_conditional_dist(condition_data_model(dm, cond), mm, theta, phi, real.m_tilde, t)
    return SamplingDistribution(d.outcomes, d.pattern, d.source, cond.x_tilde)


def potentially_incorrect_dist_given_x(dm, theta, real: Realisation, t, cond) -> SamplingDistribution:
    check_sampling_applicability(dm, real, cond, t)
    d = potentially_incorrect_dist(condition_data_model(dm, cond), theta, real.m_tilde, t)
    return SamplingDistribution(d.outcomes, d.pattern, d.source, cond.x_tilde)


def verify_theorem3_given_x(
    dm: DiscreteDataModel,
    mm: MissingnessModel,
    real: Realisation,
    t: Statistic,
    cond: ConditioningFunction,
    tol: float = EQ_TOL,
    strict: bool = True,
) -> Theorem3Report:
    """Theorem check with the weaker condition: g_phi(m~|y) constant on b(y) = x~."""
    observed = check_sampling_applicability(dm, real, cond, t)
    cdm = condition_data_model(dm, cond)
    weak = classify_covariate_dependent_mcar(mm, real, cond, tol).holds
    cells = _cells(cdm, mm, real.m_tilde, t, list(dm.theta_grid), list(mm.phi_grid))
    report = Theorem3Report(weak, cells, conditional=True, x_observed=observed)
    if strict and weak:
        _assert_equal(report, tol, "the fibre-wise constancy condition")
    return report
