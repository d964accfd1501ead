"""Repeated-sampling behaviour of the L2 maximum-likelihood estimator.

Data are ``n_units`` i.i.d. units.  Each unit yields an observed record
(pattern, observed values), so a replication is summarised by multinomial
counts over record types and the log of L2 is a count-weighted sum of the
per-type log-likelihood curves over the theta grid.

Replication ``r`` draws from its own Philox stream keyed by ``seed`` with
counter ``r``, and replications are processed in fixed-size chunks, so the
report does not depend on how many worker threads were used.

Observed information is the negative central second difference of the
log-likelihood on the grid; this is an approximation to the curvature of
a smooth likelihood, and :func:`exact_repeated_sampling` is the reference.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import NormalDist
from typing import Mapping

import numpy as np

from .classify import classify_everywhere_mar
from .errors import ResourceError, TheoremViolation, UsageError
from .likelihood import FISHER_CUTOFF, ignoring_likelihood
from .model import (
    ConditioningFunction,
    DataSpace,
    DiscreteDataModel,
    MissingnessModel,
    Pattern,
    Realisation,
    all_patterns,
    as_point,
    extract_observed,
    point_label,
)
from .numeric import Number, all_exact, close, fsum_exact

INTERVAL_RULES = ("wald_observed", "wald_naive", "likelihood")
CONDITIONING_MODES = ("none", "pattern", "covariate")
CHUNK = 2000
EXACT_OUTCOME_CAP = 200_000


def _log(x: Number) -> float:
    if x == 0:
        return -math.inf
    if isinstance(x, Fraction):
        return math.log(x.numerator) - math.log(x.denominator)
    return math.log(x)


@dataclass(frozen=True)
class SimulationPlan:
    """One repeated-sampling experiment on i.i.d. units.

    ``dm`` and ``mm`` are per-unit models.  ``conditioning`` is ``"none"``,
    ``"pattern"`` (the number of units showing each pattern is held at
    ``context_counts``) or ``"covariate"`` (the number of units at each
    level of ``covariate`` is held at ``context_counts``).
    """

    dm: DiscreteDataModel
    mm: MissingnessModel
    theta_true: tuple
    phi_true: tuple
    n_units: int
    n_replications: int
    seed: int = 0
    intervals: tuple = INTERVAL_RULES
    level: Number = Fraction(95, 100)
    likelihood_cutoff: Number = FISHER_CUTOFF
    conditioning: str = "none"
    context_counts: Mapping | None = None
    covariate: ConditioningFunction | None = None
    check_profile_mle: bool = False
    chunk_size: int = CHUNK

    def __post_init__(self):
        object.__setattr__(self, "theta_true", as_point(self.theta_true))
        object.__setattr__(self, "phi_true", as_point(self.phi_true))
        if self.n_replications < 1:
            raise UsageError("n_replications must be at least 1")
        if self.n_units < 1:
            raise UsageError("n_units must be at least 1")
        if self.theta_true not in self.dm.tables:
            raise UsageError(f"true theta {point_label(self.theta_true)} is not on the theta grid")
        if self.phi_true not in self.mm.kernels:
            raise UsageError(f"true phi {point_label(self.phi_true)} is not on the phi grid")
        if self.dm.space != self.mm.space:
            raise UsageError("per-unit data and missingness models live on different spaces")
        unknown = set(self.intervals) - set(INTERVAL_RULES)
        if unknown:
            raise UsageError(f"unknown interval rule(s) {sorted(unknown)}; choose from {INTERVAL_RULES}")
        if self.conditioning not in CONDITIONING_MODES:
            raise UsageError(f"conditioning must be one of {CONDITIONING_MODES}")
        if self.conditioning != "none":
            if not self.context_counts:
                raise UsageError(f"conditioning on {self.conditioning} needs context_counts")
            if sum(self.context_counts.values()) != self.n_units:
                raise UsageError("context_counts must add up to n_units")
        if self.conditioning == "covariate" and self.covariate is None:
            raise UsageError("covariate conditioning needs a conditioning function")
        if not 0 < self.level < 1:
            raise UsageError("interval level must lie in (0, 1)")
        if self.chunk_size < 1:
            raise UsageError("chunk_size must be positive")
        theta_step(self.dm)


def theta_step(dm: DiscreteDataModel) -> Number:
    """Grid step of a scalar, uniformly spaced theta grid (h = 0 for one point)."""
    if any(len(t) != 1 for t in dm.theta_grid):
        raise UsageError("simulation needs a scalar theta grid")
    vals = [t[0] for t in dm.theta_grid]
    if len(vals) == 1:
        return 0
    if vals != sorted(vals):
        raise UsageError("simulation needs an increasing theta grid")
    h = vals[1] - vals[0]
    if not all(close(b - a, h, 1e-9) for a, b in zip(vals, vals[1:])):
        raise UsageError("simulation needs a uniformly spaced theta grid")
    return h


# --------------------------------------------------------------------------
# per-unit record types
# --------------------------------------------------------------------------


@dataclass
class _Context:
    """A block of units sharing a sampling law (all units, one pattern, or one covariate level)."""

    label: str
    n: int
    types: list  # (pattern, observed values)
    p_true: np.ndarray
    ll: np.ndarray  # types x theta grid, log of the per-unit L2 factor
    ll_joint: np.ndarray | None = None  # types x theta x phi, log of the L1 factor


def _record_groups(space: DataSpace, patterns) -> dict:
    groups: dict = {}
    for m in patterns:
        for i, y in enumerate(space.points):
            groups.setdefault((m, extract_observed(y, m).observed_values), []).append(i)
    return groups


def _contexts(plan: SimulationPlan, joint: bool = False) -> list[_Context]:
    dm, mm = plan.dm, plan.mm
    space = dm.space
    f0 = dm.table(plan.theta_true)
    g0 = mm.kernels[plan.phi_true]
    patterns = all_patterns(space.n_coords)
    groups = _record_groups(space, patterns)
    thetas = dm.theta_grid

    if plan.conditioning == "none":
        blocks = [("all", plan.n_units, list(range(space.size)), patterns)]
    elif plan.conditioning == "pattern":
        blocks = [
            (str(Pattern.parse(m)), n, list(range(space.size)), [Pattern.parse(m)])
            for m, n in plan.context_counts.items()
        ]
    else:
        cond = plan.covariate
        blocks = []
        for x, n in plan.context_counts.items():
            fiber = [i for i, lab in enumerate(cond.labels) if _same_label(lab, x)]
            if not fiber:
                raise UsageError(f"covariate level {x!r} does not occur")
            blocks.append((str(x), n, fiber, patterns))

    out = []
    for label, n, fiber, pats in blocks:
        fiber_set = set(fiber)
        weights, types, lls, joints = [], [], [], []
        norm_true = fsum_exact(
            f0[i] * mm.g(plan.phi_true, m, i) for m in pats for i in fiber
        )
        if norm_true == 0:
            raise UsageError(f"context {label} has probability zero at the true parameters")
        for (m, obs), idx in groups.items():
            if m not in pats:
                continue
            idx = [i for i in idx if i in fiber_set]
            if not idx:
                continue
            col = g0.get(m)
            w = fsum_exact(f0[i] * col[i] for i in idx) if col is not None else 0
            if w == 0:
                continue
            weights.append(w / norm_true)
            types.append((m, obs))
            row = []
            for t in thetas:
                f = dm.tables[t]
                num = fsum_exact(f[i] for i in idx)
                if plan.conditioning == "covariate":
                    den = fsum_exact(f[i] for i in fiber)
                    row.append(_log(num) - _log(den) if den else -math.inf)
                else:
                    row.append(_log(num))
            lls.append(row)
            if joint:
                joints.append([
                    [_log(fsum_exact(dm.tables[t][i] * mm.g(p, m, i) for i in idx)) for p in mm.phi_grid]
                    for t in thetas
                ])
        p = np.array([float(w) for w in weights])
        out.append(_Context(
            label, n, types, p / p.sum(), np.array(lls, dtype=float),
            np.array(joints, dtype=float) if joint else None,
        ))
    return out


def _same_label(lab, x) -> bool:
    if lab == x:
        return True
    return point_label(as_point(lab)) == str(x)


# --------------------------------------------------------------------------
# per-replication computation
# --------------------------------------------------------------------------


def replication_streams(seed: int, start: int, stop: int):
    for r in range(start, stop):
        yield np.random.Generator(np.random.Philox(key=seed, counter=[0, r, 0, 0]))


def draw_counts(contexts: list[_Context], seed: int, start: int, stop: int) -> list[np.ndarray]:
    """Per context, a (stop - start) x n_types matrix of record-type counts."""
    mats = [np.zeros((stop - start, len(c.types)), dtype=np.int64) for c in contexts]
    for k, rng in enumerate(replication_streams(seed, start, stop)):
        for c, mat in zip(contexts, mats):
            mat[k] = rng.multinomial(c.n, c.p_true)
    return mats


def _weighted_sum(contexts, counts, attr: str) -> np.ndarray:
    """sum over types of count * curve, skipping zero counts so -inf stays finite-safe."""
    total = None
    for c, mat in zip(contexts, counts):
        curves = getattr(c, attr)
        for t in range(len(c.types)):
            n = mat[:, t].astype(float)
            curve = curves[t]
            shape = (len(n),) + (1,) * curve.ndim
            contrib = n.reshape(shape) * curve[None, ...]
            if not np.all(np.isfinite(curve)):
                contrib = np.where(n.reshape(shape) > 0, contrib, 0.0)
            total = contrib if total is None else total + contrib
    return total


def _observed_information(ll: np.ndarray, idx: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """-(l[i+1] - 2 l[i] + l[i-1]) / h^2 at idx clamped into the interior."""
    g = ll.shape[1]
    if g < 3 or h == 0:
        return np.full(len(idx), np.nan), np.ones(len(idx), dtype=bool)
    j = np.clip(idx, 1, g - 2)
    rows = np.arange(len(idx))
    with np.errstate(invalid="ignore"):
        info = -(ll[rows, j + 1] - 2.0 * ll[rows, j] + ll[rows, j - 1]) / (h * h) + 0.0
    return info, j != idx


def _chunk_stats(plan: SimulationPlan, contexts, grid: np.ndarray, h: float, z: float,
                 se_naive: float, start: int, stop: int) -> dict:
    counts = draw_counts(contexts, plan.seed, start, stop)
    ll = _weighted_sum(contexts, counts, "ll")
    best = ll.max(axis=1)
    degenerate = ~np.isfinite(best)
    idx = np.argmax(ll, axis=1)
    ties = (ll == best[:, None]).sum(axis=1) > 1
    mle = grid[idx]
    info, boundary = _observed_information(ll, idx, h)
    with np.errstate(divide="ignore", invalid="ignore"):
        se_obs = np.where(np.isfinite(info) & (info > 0), 1.0 / np.sqrt(info), np.nan)
    true_idx = int(np.searchsorted(grid, float(plan.theta_true[0])))
    out = {
        "mle": mle,
        "degenerate": degenerate,
        "ties": ties,
        "boundary": boundary,
        "se_observed": se_obs,
    }
    err = np.abs(mle - float(plan.theta_true[0]))
    if "wald_observed" in plan.intervals:
        out["cover_wald_observed"] = np.where(np.isnan(se_obs), np.nan, err <= z * se_obs)
    if "wald_naive" in plan.intervals:
        out["cover_wald_naive"] = (err <= z * se_naive).astype(float)
    if "likelihood" in plan.intervals:
        with np.errstate(invalid="ignore"):
            out["cover_likelihood"] = (ll[:, true_idx] - best > math.log(plan.likelihood_cutoff)).astype(float)
    if plan.check_profile_mle:
        l1 = _weighted_sum(contexts, counts, "ll_joint")
        prof = l1.max(axis=2)
        pidx = np.argmax(prof, axis=1)
        rows = np.arange(len(pidx))
        same = (pidx == idx) | np.isclose(ll[rows, pidx], best, rtol=1e-9, atol=0.0)
        out["profile_mismatch"] = ~same & ~degenerate
    return out


def _run_chunks(plan: SimulationPlan, fn, threads: int) -> dict:
    bounds = [(a, min(a + plan.chunk_size, plan.n_replications))
              for a in range(0, plan.n_replications, plan.chunk_size)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda b: fn(*b), bounds))
    else:
        parts = [fn(*b) for b in bounds]
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


# --------------------------------------------------------------------------
# information
# --------------------------------------------------------------------------


def _unit_types(dm: DiscreteDataModel, mm: MissingnessModel, theta, phi, naive: bool):
    """Per-unit record types with their exact probabilities under the true or naive law."""
    space = dm.space
    f = dm.table(theta)
    kernel = mm.kernels[as_point(phi)]
    gbar = {m: fsum_exact(a * b for a, b in zip(f, col)) for m, col in kernel.items()}
    out = []
    for (m, obs), idx in _record_groups(space, list(kernel)).items():
        if naive:
            w = gbar[m] * fsum_exact(f[i] for i in idx)
        else:
            w = fsum_exact(f[i] * kernel[m][i] for i in idx)
        out.append((m, idx, w))
    return out


def _fd_information(values: list[float], h) -> float:
    lo, mid, hi = values
    if h == 0:
        return 0.0
    return -(hi - 2.0 * mid + lo) / float(h) ** 2 + 0.0


def _neighbours(dm: DiscreteDataModel, theta):
    grid = list(dm.theta_grid)
    i = grid.index(as_point(theta))
    if len(grid) < 3:
        return None
    j = min(max(i, 1), len(grid) - 2)
    return grid[j - 1], grid[j], grid[j + 1]


def unit_information(dm: DiscreteDataModel, mm: MissingnessModel, theta, phi, naive: bool = False) -> float:
    """Expected per-unit observed information of L2 at theta, under the true or naive pattern law."""
    h = theta_step(dm)
    nb = _neighbours(dm, theta)
    if nb is None or h == 0:
        return 0.0
    terms = []
    for m, idx, w in _unit_types(dm, mm, theta, phi, naive):
        if w == 0:
            continue
        curve = [_log(fsum_exact(dm.tables[t][i] for i in idx)) for t in nb]
        terms.append(float(w) * _fd_information(curve, h))
    return math.fsum(terms)


def naive_expected_information(dm: DiscreteDataModel, mm: MissingnessModel, theta, n_units: int, phi=None) -> float:
    """Expected information of L2 if each unit's pattern law did not depend on Y.

    The pattern law is replaced by its average over Y at (theta, phi),
    g_bar(m) = sum_y f_theta(y) g_phi(m | y).  This is the quantity that
    is only appropriate under everywhere MCAR.
    """
    phi = mm.phi_grid[0] if phi is None else phi
    return n_units * unit_information(dm, mm, theta, phi, naive=True)


def true_expected_information(dm: DiscreteDataModel, mm: MissingnessModel, theta, n_units: int, phi=None) -> float:
    phi = mm.phi_grid[0] if phi is None else phi
    return n_units * unit_information(dm, mm, theta, phi, naive=False)


def _se(info: float) -> float | None:
    return 1.0 / math.sqrt(info) if info > 0 and math.isfinite(info) else None


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------


@dataclass
class SimulationReport:
    n_units: int
    n_replications: int
    seed: int
    theta_true: float
    n_valid: int
    degenerate: int
    mean: float | None
    bias: float | None
    mc_se_mean: float | None
    sd: float | None
    mc_se_sd: float | None
    mean_se_observed: float | None
    mc_se_mean_se_observed: float | None
    se_naive: float | None
    se_expected: float | None
    coverage: dict = field(default_factory=dict)
    coverage_mc_se: dict = field(default_factory=dict)
    ties: int = 0
    boundary_hits: int = 0
    se_failures: int = 0
    profile_checked: int = 0
    profile_mismatches: int = 0
    conditioning: str = "none"

    def agrees(self, a: str, b: str, k: float = 3.0) -> bool:
        """|a - b| within k combined Monte Carlo standard errors (fixed SEs count as 0)."""
        val = {"sd": (self.sd, self.mc_se_sd), "se_observed": (self.mean_se_observed, self.mc_se_mean_se_observed),
               "se_naive": (self.se_naive, 0.0), "se_expected": (self.se_expected, 0.0)}
        (x, sx), (y, sy) = val[a], val[b]
        if x is None or y is None:
            return False
        return abs(x - y) <= k * math.hypot(sx or 0.0, sy or 0.0)


def _mean_sd(x: np.ndarray):
    n = len(x)
    if n == 0:
        return None, None, None, None
    mean = float(np.mean(x))
    if n == 1:
        return mean, None, None, None
    dev = x - mean
    var = float(np.sum(dev * dev) / (n - 1))
    sd = math.sqrt(var)
    m4 = float(np.mean(dev ** 4))
    m2 = float(np.mean(dev * dev))
    # delta method for the SD: var(s^2) ~ (m4 - m2^2) / n
    se_sd = math.sqrt(max(m4 - m2 * m2, 0.0) / n) / (2 * sd) if sd > 0 else 0.0
    return mean, sd / math.sqrt(n), sd, se_sd


def run_simulation(plan: SimulationPlan, threads: int = 1, strict: bool = True) -> SimulationReport:
    contexts = _contexts(plan, joint=plan.check_profile_mle)
    grid = np.array([float(t[0]) for t in plan.dm.theta_grid])
    h = float(theta_step(plan.dm))
    z = NormalDist().inv_cdf((1 + float(plan.level)) / 2)
    se_naive = _se(naive_expected_information(plan.dm, plan.mm, plan.theta_true, plan.n_units, plan.phi_true))
    se_expected = _se(true_expected_information(plan.dm, plan.mm, plan.theta_true, plan.n_units, plan.phi_true))

    def fn(a, b):
        return _chunk_stats(plan, contexts, grid, h, z, se_naive if se_naive else math.nan, a, b)

    res = _run_chunks(plan, fn, threads)
    ok = ~res["degenerate"]
    mle = res["mle"][ok]
    mean, se_mean, sd, se_sd = _mean_sd(mle)
    se_obs = res["se_observed"][ok]
    good = ~np.isnan(se_obs)
    mse, se_mse, _, _ = _mean_sd(se_obs[good])
    coverage, cov_se = {}, {}
    for rule in plan.intervals:
        c = res[f"cover_{rule}"][ok]
        c = c[~np.isnan(c)]
        if len(c):
            p = float(np.mean(c))
            coverage[rule] = p
            cov_se[rule] = math.sqrt(p * (1 - p) / len(c))
        else:
            coverage[rule], cov_se[rule] = None, None
    report = SimulationReport(
        n_units=plan.n_units,
        n_replications=plan.n_replications,
        seed=plan.seed,
        theta_true=float(plan.theta_true[0]),
        n_valid=int(ok.sum()),
        degenerate=int(res["degenerate"].sum()),
        mean=mean,
        bias=None if mean is None else mean - float(plan.theta_true[0]),
        mc_se_mean=se_mean,
        sd=sd,
        mc_se_sd=se_sd,
        mean_se_observed=mse,
        mc_se_mean_se_observed=se_mse,
        se_naive=se_naive,
        se_expected=se_expected,
        coverage=coverage,
        coverage_mc_se=cov_se,
        ties=int(res["ties"][ok].sum()),
        boundary_hits=int(res["boundary"][ok].sum()),
        se_failures=int((~good).sum()),
        conditioning=plan.conditioning,
    )
    if plan.check_profile_mle:
        report.profile_checked = int(ok.sum())
        report.profile_mismatches = int(res["profile_mismatch"].sum())
        if strict and report.profile_mismatches and classify_everywhere_mar(plan.mm).holds:
            raise TheoremViolation(
                f"{report.profile_mismatches} replications have a profile-L1 MLE different from the "
                "L2 MLE although the mechanism is everywhere MAR"
            )
    return report


# --------------------------------------------------------------------------
# exact enumeration oracle
# --------------------------------------------------------------------------


@dataclass
class ExactSamplingReport:
    n_units: int
    theta_true: Fraction | float
    n_records: int
    mle_distribution: dict  # theta label -> probability
    mean: Number
    variance: Number
    sd: float
    tie_probability: Number
    expected_information: float
    naive_expected_information: float
    se_expected: float | None
    se_naive: float | None

    @property
    def naive_margin(self) -> float:
        return abs(self.naive_expected_information - self.expected_information)


def _naive_unit_model(dm: DiscreteDataModel, mm: MissingnessModel, theta, phi) -> MissingnessModel:
    f = dm.table(theta)
    kernel = mm.kernels[as_point(phi)]
    gbar = {m: fsum_exact(a * b for a, b in zip(f, col)) for m, col in kernel.items()}
    return MissingnessModel(mm.space, [as_point(phi)], [{m: (v,) * mm.space.size for m, v in gbar.items()}])


def exact_repeated_sampling(
    dm: DiscreteDataModel, mm: MissingnessModel, theta, phi, n_units: int, cap: int = EXACT_OUTCOME_CAP
) -> ExactSamplingReport:
    """Exact law of the L2 MLE over every (y, m) outcome of ``n_units`` i.i.d. units.

    Uses the n-unit product models and :func:`ignoring_likelihood`, an
    independent route from the record-type machinery behind
    :func:`run_simulation`.
    """
    if n_units > 4:
        raise ResourceError("exact enumeration is limited to 4 units")
    theta, phi = as_point(theta), as_point(phi)
    h = theta_step(dm)
    n_outcomes = (dm.space.size * len(mm.kernels[phi])) ** n_units
    if n_outcomes > cap:
        raise ResourceError(f"{n_outcomes} outcomes exceeds the enumeration cap of {cap}")
    unit_mm = MissingnessModel(mm.space, [phi], [mm.kernels[phi]])
    big_dm = DiscreteDataModel.from_iid(dm, n_units)
    big_mm = MissingnessModel.from_iid(unit_mm, n_units)
    naive_mm = MissingnessModel.from_iid(_naive_unit_model(dm, mm, theta, phi), n_units)
    f = big_dm.table(theta)
    # group (y, m) outcomes by observed record
    records: dict = {}
    for m in big_mm.patterns(phi):
        g, gn = big_mm.column(phi, m), naive_mm.column(phi, m)
        for i, y in enumerate(big_dm.space.points):
            w, wn = f[i] * g[i], f[i] * gn[i]
            if w == 0 and wn == 0:
                continue
            key = (m, extract_observed(y, m).observed_values)
            acc = records.setdefault(key, [0, 0, y])
            acc[0] += w
            acc[1] += wn
    nb = _neighbours(dm, theta)
    dist: dict = {}
    tie_p: Number = 0
    info_terms, naive_terms = [], []
    for (m, _), (w, wn, y) in records.items():
        lik = ignoring_likelihood(big_dm, Realisation(y, m))
        if nb is not None and h != 0:
            curve = [_log(lik[t]) for t in nb]
            i_obs = _fd_information(curve, h)
        else:
            i_obs = 0.0
        if w:
            best, n_ties = lik.argmax()
            dist[best] = dist.get(best, 0) + w
            if n_ties > 1:
                tie_p += w
            info_terms.append(float(w) * i_obs)
        if wn:
            naive_terms.append(float(wn) * i_obs)
    mean = fsum_exact(p * t[0] for t, p in dist.items())
    var = fsum_exact(p * (t[0] - mean) ** 2 for t, p in dist.items())
    e_info, e_naive = math.fsum(info_terms), math.fsum(naive_terms)
    return ExactSamplingReport(
        n_units=n_units,
        theta_true=theta[0],
        n_records=len(records),
        mle_distribution={point_label(t): dist[t] for t in dm.theta_grid if t in dist},
        mean=mean,
        variance=var,
        sd=math.sqrt(float(var)),
        tie_probability=tie_p,
        expected_information=e_info,
        naive_expected_information=e_naive,
        se_expected=_se(e_info),
        se_naive=_se(e_naive),
    )


# --------------------------------------------------------------------------
# frequentist properties of Bayesian summaries
# --------------------------------------------------------------------------


@dataclass
class BayesFrequencyReport:
    n_replications: int
    n_valid: int
    max_tv: float
    n_tv_nonzero: int  # replications with TV above ``tv_tol``
    tv_tol: float
    mean_joint: float | None
    mean_ignoring: float | None
    bias_joint: float | None
    bias_ignoring: float | None
    coverage_joint: float | None
    coverage_ignoring: float | None
    mc_se_bias: float | None
    equality_expected: bool


def _log_posterior_theta(ll: np.ndarray, log_prior: np.ndarray) -> np.ndarray:
    """Normalised theta-posteriors from per-replication log-likelihood arrays.

    ``ll`` is reps x theta (ignoring) or reps x theta x phi (joint).
    """
    with np.errstate(invalid="ignore"):
        lp = ll + log_prior[None, ...]
    top = lp.reshape(len(lp), -1).max(axis=1)
    top = np.where(np.isfinite(top), top, 0.0)
    shape = (len(lp),) + (1,) * (lp.ndim - 1)
    w = np.exp(lp - top.reshape(shape))
    if w.ndim == 3:
        w = w.sum(axis=2)
    return w / w.sum(axis=1, keepdims=True)


def _central_cover(post: np.ndarray, true_idx: int, level: float) -> np.ndarray:
    cum = np.cumsum(post, axis=1)
    tail = (1 - level) / 2
    lo = (cum >= tail).argmax(axis=1)
    hi = (cum >= 1 - tail).argmax(axis=1)
    return ((lo <= true_idx) & (true_idx <= hi)).astype(float)


def frequentist_bayes_properties(
    plan: SimulationPlan, prior, tv_tol: float = 1e-12, threads: int = 1, strict: bool = True
) -> BayesFrequencyReport:
    """Per replication, compare the theta-marginal of the joint posterior with the ignoring posterior."""
    from .bayes import Prior

    if not isinstance(prior, Prior):
        raise UsageError("prior must be a bayes.Prior over the per-unit (theta, phi) grids")
    dm, mm = plan.dm, plan.mm
    table = np.array([[float(prior.table.get((t, p), 0)) for p in mm.phi_grid] for t in dm.theta_grid])
    with np.errstate(divide="ignore"):
        log_joint_prior = np.log(table)
        log_theta_prior = np.log(table.sum(axis=1))
    contexts = _contexts(plan, joint=True)
    grid = [float(t[0]) for t in dm.theta_grid]
    true_idx = grid.index(float(plan.theta_true[0]))
    theta_arr = np.array(grid)
    level = float(plan.level)

    def fn(a, b):
        counts = draw_counts(contexts, plan.seed, a, b)
        ll2 = _weighted_sum(contexts, counts, "ll")
        ll1 = _weighted_sum(contexts, counts, "ll_joint")
        valid = np.isfinite((ll2 + log_theta_prior[None, :]).max(axis=1))
        p_ign = _log_posterior_theta(ll2, log_theta_prior)
        p_joint = _log_posterior_theta(ll1, log_joint_prior)
        tv = 0.5 * np.abs(p_joint - p_ign).sum(axis=1)
        return {
            "valid": valid,
            "tv": tv,
            "mean_joint": (p_joint * theta_arr[None, :]).sum(axis=1),
            "mean_ign": (p_ign * theta_arr[None, :]).sum(axis=1),
            "cover_joint": _central_cover(p_joint, true_idx, level),
            "cover_ign": _central_cover(p_ign, true_idx, level),
        }

    res = _run_chunks(plan, fn, threads)
    ok = res["valid"]
    tv = res["tv"][ok]
    expected = classify_everywhere_mar(mm).holds and prior.is_independent()
    t0 = float(plan.theta_true[0])
    mj, mi = res["mean_joint"][ok], res["mean_ign"][ok]
    n_bad = int((tv > tv_tol).sum())
    report = BayesFrequencyReport(
        n_replications=plan.n_replications,
        n_valid=int(ok.sum()),
        max_tv=float(tv.max()) if len(tv) else 0.0,
        n_tv_nonzero=n_bad,
        tv_tol=tv_tol,
        mean_joint=float(mj.mean()) if len(mj) else None,
        mean_ignoring=float(mi.mean()) if len(mi) else None,
        bias_joint=float(mj.mean()) - t0 if len(mj) else None,
        bias_ignoring=float(mi.mean()) - t0 if len(mi) else None,
        coverage_joint=float(res["cover_joint"][ok].mean()) if len(mj) else None,
        coverage_ignoring=float(res["cover_ign"][ok].mean()) if len(mi) else None,
        mc_se_bias=float(mi.std(ddof=1) / math.sqrt(len(mi))) if len(mi) > 1 else None,
        equality_expected=expected,
    )
    if strict and expected and n_bad:
        raise TheoremViolation(
            f"{n_bad} replications have posterior TV above {tv_tol} under everywhere MAR "
            "with an independent prior"
        )
    return report


# --------------------------------------------------------------------------
# built-in plans
# --------------------------------------------------------------------------


def monotone_unit_model(grid_denominator: int = 1000) -> DiscreteDataModel:
    """Y1 ~ Bernoulli(1/2); Y2 | Y1 = 1 ~ Bernoulli(theta); Y2 | Y1 = 0 ~ Bernoulli(theta / 2)."""
    space = DataSpace.from_supports([(0, 1), (0, 1)], ["Y1", "Y2"])
    grid = [Fraction(k, grid_denominator) for k in range(1, grid_denominator)]

    def f(t, y):
        p = t[0] if y[0] == 1 else t[0] / 2
        return Fraction(1, 2) * (p if y[1] == 1 else 1 - p)

    return DiscreteDataModel.from_function(space, grid, f)


MONOTONE_PHI_GRID = [(Fraction(4, 5), Fraction(3, 10)), (Fraction(11, 20), Fraction(11, 20)), (Fraction(1, 2), Fraction(1, 2))]


def monotone_mechanism(space: DataSpace, phi_grid=None) -> MissingnessModel:
    """Y1 always observed; Y2 observed with probability phi[0] if Y1 = 1, else phi[1]."""
    phi_grid = MONOTONE_PHI_GRID if phi_grid is None else phi_grid

    def g(p, m, y):
        seen = p[0] if y[0] == 1 else p[1]
        return {(1, 1): seen, (1, 0): 1 - seen}.get(m.bits, 0)

    return MissingnessModel.from_function(space, phi_grid, g, patterns=["11", "10"])


def mcar_mechanism(space: DataSpace, phi_grid=None) -> MissingnessModel:
    """Y1 always observed; Y2 observed with probability phi whatever Y."""
    phi_grid = [Fraction(11, 20), Fraction(3, 10), Fraction(4, 5)] if phi_grid is None else phi_grid

    def g(p, m, y):
        return {(1, 1): p[0], (1, 0): 1 - p[0]}.get(m.bits, 0)

    return MissingnessModel.from_function(space, phi_grid, g, patterns=["11", "10"])


THETA_TRUE = Fraction(3, 5)


def monotone_mar_plan(n_units: int = 200, n_replications: int = 100_000, seed: int = 20240601,
                      grid_denominator: int = 1000, **kw) -> SimulationPlan:
    dm = monotone_unit_model(grid_denominator)
    mm = monotone_mechanism(dm.space)
    return SimulationPlan(dm, mm, (THETA_TRUE,), MONOTONE_PHI_GRID[0], n_units, n_replications, seed, **kw)


def mcar_control_plan(n_units: int = 200, n_replications: int = 100_000, seed: int = 20240602,
                      grid_denominator: int = 1000, **kw) -> SimulationPlan:
    dm = monotone_unit_model(grid_denominator)
    mm = mcar_mechanism(dm.space)
    return SimulationPlan(dm, mm, (THETA_TRUE,), (Fraction(11, 20),), n_units, n_replications, seed, **kw)


BUILTIN_PLANS = {"monotone-mar": monotone_mar_plan, "mcar-control": mcar_control_plan}


def is_exact_plan(plan: SimulationPlan) -> bool:
    return plan.dm.exact and plan.mm.exact and all_exact(plan.theta_true)


__all__ = [
    "SimulationPlan", "SimulationReport", "ExactSamplingReport", "BayesFrequencyReport",
    "run_simulation", "exact_repeated_sampling", "naive_expected_information",
    "true_expected_information", "frequentist_bayes_properties", "BUILTIN_PLANS",
    "monotone_mar_plan", "mcar_control_plan",
]
