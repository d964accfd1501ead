"""Grid posteriors for the joint and the ignoring model."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .classify import classify_realised_mar
from .errors import DomainError, StructuralError, TheoremViolation
from .likelihood import ignoring_likelihood, joint_likelihood
from .model import (
    DiscreteDataModel,
    JointParameterSpace,
    MissingnessModel,
    Point,
    Realisation,
    as_point,
    point_label,
)
from .numeric import EQ_TOL, Number, all_exact, close, fsum_exact


@dataclass(frozen=True)
class Prior:
    """A prior table over (theta, phi) pairs."""

    table: Mapping[tuple[Point, Point], Number]

    def __post_init__(self):
        table = {(as_point(t), as_point(p)): v for (t, p), v in dict(self.table).items()}
        if any(v < 0 for v in table.values()):
            raise DomainError("prior has a negative entry")
        if not close(fsum_exact(table.values()), 1):
            raise DomainError("prior does not sum to 1")
        object.__setattr__(self, "table", table)

    @classmethod
    def product(cls, p_theta: Mapping, p_phi: Mapping) -> Prior:
        return cls(
            {(as_point(t), as_point(p)): a * b for t, a in p_theta.items() for p, b in p_phi.items()}
        )

    @classmethod
    def uniform(cls, theta_grid: Sequence, phi_grid: Sequence, exact: bool = True) -> Prior:
        one = Fraction(1) if exact else 1.0
        return cls.product(
            {t: one / len(theta_grid) for t in theta_grid},
            {p: one / len(phi_grid) for p in phi_grid},
        )

    def theta_margin(self) -> dict[Point, Number]:
        out: dict = {}
        for (t, _), v in self.table.items():
            out[t] = out.get(t, 0) + v
        return out

    def phi_margin(self) -> dict[Point, Number]:
        out: dict = {}
        for (_, p), v in self.table.items():
            out[p] = out.get(p, 0) + v
        return out

    def is_independent(self, tol: float = EQ_TOL) -> bool:
        """Exact outer-product test in rational mode."""
        pt, pp = self.theta_margin(), self.phi_margin()
        for t, a in pt.items():
            for p, b in pp.items():
                if not close(self.table.get((t, p), 0), a * b, tol):
                    return False
        return True


@dataclass(frozen=True)
class Posterior:
    domain: tuple
    probs: tuple
    evidence: Number

    def __getitem__(self, point):
        return self.probs[self.domain.index(point)]

    def items(self):
        return zip(self.domain, self.probs)

    def as_dict(self) -> dict:
        return dict(zip(self.domain, self.probs))


def _normalise(domain, weights, what: str) -> Posterior:
    z = fsum_exact(weights)
    if z == 0:
        raise DomainError(f"{what}: realisation impossible under all parameters with prior mass")
    return Posterior(tuple(domain), tuple(w / z for w in weights), z)


def posterior_joint(
    dm: DiscreteDataModel,
    mm: MissingnessModel,
    joint_space: JointParameterSpace,
    real: Realisation,
    prior: Prior,
) -> Posterior:
    outside = [k for k, v in prior.table.items() if v > 0 and not joint_space.contains(*k)]
    if outside:
        raise StructuralError(
            f"prior puts mass outside the joint parameter space, e.g. {outside[0]}"
        )
    lik = joint_likelihood(dm, mm, joint_space, real)
    return _normalise(
        lik.domain, [prior.table.get(k, 0) * v for k, v in lik.items()], "joint posterior"
    )


def posterior_ignoring(dm: DiscreteDataModel, real: Realisation, p_theta: Mapping) -> Posterior:
    p_theta = {as_point(k): v for k, v in p_theta.items()}
    lik = ignoring_likelihood(dm, real)
    return _normalise(
        lik.domain, [p_theta.get(t, 0) * v for t, v in lik.items()], "ignoring posterior"
    )


def theta_marginal(post: Posterior, theta_grid: Sequence[Point]) -> Posterior:
    """Sum a joint (theta, phi) posterior over phi."""
    acc = {t: [] for t in theta_grid}
    for (t, _), v in post.items():
        acc[t].append(v)
    return Posterior(tuple(theta_grid), tuple(fsum_exact(acc[t]) if acc[t] else 0 for t in theta_grid), post.evidence)


def tv_distance(p: Mapping, q: Mapping) -> Number:
    keys = list(p) + [k for k in q if k not in p]
    return fsum_exact(abs(p.get(k, 0) - q.get(k, 0)) for k in keys) / 2


def posterior_mean(post: Posterior, component: int = 0) -> Number:
    return fsum_exact(p * point[component] for point, p in post.items())


def hpd_set(post: Posterior, level: Number = Fraction(95, 100)) -> tuple[list, Number]:
    """Smallest set of highest-probability grid points reaching ``level``.

    Ties are broken by grid order.  Returns the set (in grid order) and the
    coverage it actually achieves, which on a grid generally exceeds level.
    """
    order = sorted(range(len(post.probs)), key=lambda i: (-post.probs[i], i))
    chosen, mass = [], 0
    for i in order:
        if mass >= level:
            break
        chosen.append(i)
        mass += post.probs[i]
    chosen.sort()
    return [post.domain[i] for i in chosen], mass


def central_credible_set(
    post: Posterior, level: Number = Fraction(95, 100), component: int = 0
) -> tuple[list, Number]:
    """Points between the lower and upper (1-level)/2 quantiles of a scalar marginal."""
    tail = (1 - level) / 2
    order = sorted(range(len(post.probs)), key=lambda i: post.domain[i][component])
    cum, lo, hi = 0, None, None
    for pos, i in enumerate(order):
        cum += post.probs[i]
        if lo is None and cum >= tail:
            lo = pos
        if hi is None and cum >= 1 - tail:
            hi = pos
    if hi is None:
        hi = len(order) - 1
    chosen = order[lo:hi + 1]
    return [post.domain[i] for i in sorted(chosen)], fsum_exact(post.probs[i] for i in chosen)


@dataclass
class Theorem2Report:
    tv: Number
    realised_mar: bool
    prior_independent: bool
    joint_marginal: dict
    ignoring: dict
    joint_mean: Number | None = None
    ignoring_mean: Number | None = None

    @property
    def hypotheses_hold(self) -> bool:
        return self.realised_mar and self.prior_independent


def verify_theorem2(
    dm: DiscreteDataModel,
    mm: MissingnessModel,
    joint_space: JointParameterSpace,
    real: Realisation,
    prior: Prior,
    tol: float = EQ_TOL,
    strict: bool = True,
) -> Theorem2Report:
    """Compare the theta-marginal of the joint posterior with the ignoring posterior."""
    mar = classify_realised_mar(mm, real, tol).holds
    indep = prior.is_independent(tol)
    joint = theta_marginal(posterior_joint(dm, mm, joint_space, real, prior), dm.theta_grid)
    ignoring = posterior_ignoring(dm, real, prior.theta_margin())
    tv = tv_distance(joint.as_dict(), ignoring.as_dict())
    scalar = all(len(t) == 1 for t in dm.theta_grid)
    report = Theorem2Report(
        tv=tv,
        realised_mar=mar,
        prior_independent=indep,
        joint_marginal=joint.as_dict(),
        ignoring=ignoring.as_dict(),
        joint_mean=posterior_mean(joint) if scalar else None,
        ignoring_mean=posterior_mean(ignoring) if scalar else None,
    )
    if strict and report.hypotheses_hold:
        exact = all_exact([tv])
        if (exact and tv != 0) or (not exact and tv > tol):
            raise TheoremViolation(
                f"posteriors differ (TV={tv}) although realised MAR and prior independence hold"
            )
    return report


def posterior_table(post: Posterior) -> list[tuple[str, Number]]:
    rows = []
    for point, v in post.items():
        if isinstance(point[0], tuple):
            label = f"{point_label(point[0])}|{point_label(point[1])}"
        else:
            label = point_label(point)
        rows.append((label, v))
    return rows
