"""Counterexample search over small binary instances.

Candidates are enumerated exhaustively first (mechanism values on a grid
of multiples of 1/denominator), then drawn at random from a seeded stream
if budget remains.  Each candidate has an index; hits are reported in
index order whatever the worker count.

Only g_phi(m~ | y) at y compatible with the realisation enters L1, L2 and
realised MAR, so for two coordinates the enumeration ("column mode") fixes
those values and routes the remaining mass of every y to one other
pattern.  For one coordinate the whole kernel is enumerated.
"""

from __future__ import annotations

import itertools
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .bayes import Prior, verify_theorem2
from .classify import classify_everywhere_mar, classify_realised_mar
from .errors import DomainError, UsageError
from .likelihood import fixed_phi_likelihood, ignoring_likelihood, proportional
from .model import (
    DataSpace,
    DiscreteDataModel,
    JointParameterSpace,
    MissingnessModel,
    ModelBundle,
    Pattern,
    Realisation,
    all_patterns,
    extract_observed,
)
from .necessity import verify_appendix_theorem

TARGETS = (
    "realised_mar_not_everywhere_mar",
    "fixed_phi_gap",
    "theorem2_dependent_prior",
    "proportional_without_mar",
    "appendix_violation",
)

TARGET_HELP = {
    "realised_mar_not_everywhere_mar": "realised MAR holds but everywhere MAR fails",
    "fixed_phi_gap": "realised MAR fails yet L2 is proportional to L3 at the first phi",
    "theorem2_dependent_prior": "realised MAR, dependent prior, posteriors for theta differ",
    "proportional_without_mar": "L3 proportional to L2 at every phi without realised MAR",
    "appendix_violation": "necessity theorem hypotheses hold but the biconditional fails",
}


# --------------------------------------------------------------------------
# data families
# --------------------------------------------------------------------------


def _family(name: str, n_coords: int) -> DiscreteDataModel:
    space = DataSpace.from_supports([(0, 1)] * n_coords)
    q = Fraction
    if n_coords == 1:
        grids = {"two": [q(1, 4), q(3, 4)], "three": [q(1, 4), q(1, 2), q(3, 4)], "single": [q(1, 3)]}
        if name not in grids:
            raise UsageError(f"unknown one-coordinate family {name!r}")
        return DiscreteDataModel.from_function(space, grids[name], lambda t, y: t[0] if y[0] else 1 - t[0])
    if n_coords == 2:
        if name == "independent":
            grid = [(a, b) for a in (q(1, 4), q(3, 4)) for b in (q(1, 3), q(2, 3))]
        elif name == "single":
            grid = [(q(1, 4), q(2, 3))]
        else:
            raise UsageError(f"unknown two-coordinate family {name!r}")

        def f(t, y):
            return (t[0] if y[0] else 1 - t[0]) * (t[1] if y[1] else 1 - t[1])

        return DiscreteDataModel.from_function(space, grid, f)
    raise UsageError("search supports 1 or 2 binary coordinates")


DEFAULT_FAMILIES = {1: ("two", "three", "single"), 2: ("independent", "single")}


@dataclass(frozen=True)
class SearchSpace:
    """What to enumerate: coordinate counts, data families, kernel denominator, phi-grid sizes."""

    coords: tuple = (1, 2)
    families: dict = field(default_factory=lambda: dict(DEFAULT_FAMILIES))
    denominator: int = 4
    phi_sizes: dict = field(default_factory=lambda: {1: (1, 2), 2: (1,)})
    random_denominators: tuple = (4, 6, 8, 12)

    def __post_init__(self):
        if any(n not in (1, 2) for n in self.coords):
            raise UsageError("search supports 1 or 2 binary coordinates")
        if self.denominator < 1:
            raise UsageError("denominator must be positive")


@dataclass(frozen=True)
class Candidate:
    """A compact, picklable description of one instance."""

    n_coords: int
    family: str
    y: tuple
    m: tuple
    phi_values: tuple  # one entry per phi: per-y values (full mode) or per-compatible-y values
    full_kernel: bool


def _compatible(space: DataSpace, real: Realisation) -> list[int]:
    obs = real.record.observed_values
    return [i for i, y in enumerate(space.points) if extract_observed(y, real.m_tilde).observed_values == obs]


def build_bundle(c: Candidate) -> ModelBundle:
    dm = _family(c.family, c.n_coords)
    space = dm.space
    m = Pattern(c.m)
    real = Realisation(c.y, m)
    grid = [Fraction(j + 1, len(c.phi_values) + 1) for j in range(len(c.phi_values))]
    kernels = []
    if c.full_kernel:
        # one coordinate: value is g_phi(observed | y)
        for vals in c.phi_values:
            kernels.append({Pattern((1,)): tuple(vals), Pattern((0,)): tuple(1 - v for v in vals)})
    else:
        idx = _compatible(space, real)
        other = Pattern(tuple(1 - b for b in m.bits)) if m.k < len(m) else Pattern((0,) * len(m))
        for vals in c.phi_values:
            col = [Fraction(0)] * space.size
            for i, v in zip(idx, vals):
                col[i] = v
            kernels.append({m: tuple(col), other: tuple(1 - v for v in col)})
    mm = MissingnessModel(space, grid, kernels)
    return ModelBundle(space, dm, mm, JointParameterSpace.full(dm, mm), real)


def dependent_prior(dm: DiscreteDataModel, mm: MissingnessModel) -> Prior:
    """Weight 2 on diagonal cells (i == j) and 1 elsewhere, normalised."""
    w = {(t, p): (2 if i == j else 1) for i, t in enumerate(dm.theta_grid) for j, p in enumerate(mm.phi_grid)}
    z = sum(w.values())
    return Prior({k: Fraction(v, z) for k, v in w.items()})


def _exhaustive(space: SearchSpace) -> Iterator[Candidate]:
    d = space.denominator
    values = [Fraction(k, d) for k in range(d + 1)]
    for n in space.coords:
        points = list(itertools.product((0, 1), repeat=n))
        for family in space.families[n]:
            for y in points:
                for m in all_patterns(n):
                    n_vals = 2 if n == 1 else 2 ** (n - m.k)
                    per_phi = list(itertools.product(values, repeat=n_vals))
                    for size in space.phi_sizes[n]:
                        for combo in itertools.product(per_phi, repeat=size):
                            yield Candidate(n, family, y, m.bits, combo, n == 1)


def _random(space: SearchSpace, seed: int) -> Iterator[Candidate]:
    rng = random.Random(seed)
    while True:
        n = rng.choice(space.coords)
        family = rng.choice(space.families[n])
        y = tuple(rng.randint(0, 1) for _ in range(n))
        m = tuple(rng.randint(0, 1) for _ in range(n))
        d = rng.choice(space.random_denominators)
        n_vals = 2 if n == 1 else 2 ** (n - sum(m))
        size = rng.choice((1, 2))
        combo = tuple(tuple(Fraction(rng.randint(0, d), d) for _ in range(n_vals)) for _ in range(size))
        yield Candidate(n, family, y, m, combo, n == 1)


def exhaustive_size(space: SearchSpace) -> int:
    return sum(1 for _ in _exhaustive(space))


# --------------------------------------------------------------------------
# predicates
# --------------------------------------------------------------------------


def instance_verdicts(bundle: ModelBundle) -> dict:
    """The verdicts an emitted instance advertises, recomputable from its file."""
    dm, mm, js, real = bundle.data_model, bundle.missingness_model, bundle.joint_space, bundle.realisation
    l2 = ignoring_likelihood(dm, real)
    props = [proportional(fixed_phi_likelihood(dm, mm, js, real, p), l2) for p in mm.phi_grid]
    app = verify_appendix_theorem(dm, mm, js, real, strict=False)
    out = {
        "realised_mar": classify_realised_mar(mm, real).holds,
        "everywhere_mar": classify_everywhere_mar(mm).holds,
        "proportional_first_phi": props[0],
        "proportional_all_phi": all(props),
        "grid_complete": app.grid_complete,
        "appendix_hypotheses": app.hypotheses_hold,
    }
    if bundle.prior is not None:
        rep = verify_theorem2(dm, mm, js, real, bundle.prior, strict=False)
        out["prior_independent"] = rep.prior_independent
        out["posteriors_equal"] = rep.tv == 0
    return out


def _evaluate(target: str, c: Candidate) -> tuple[ModelBundle | None, bool]:
    """(bundle if the candidate hits, whether the target's side conditions held)."""
    eligible = True
    b = build_bundle(c)
    dm, mm, js, real = b.data_model, b.missingness_model, b.joint_space, b.realisation
    if target == "realised_mar_not_everywhere_mar":
        hit = classify_realised_mar(mm, real).holds and not classify_everywhere_mar(mm).holds
    elif target == "fixed_phi_gap":
        if classify_realised_mar(mm, real).holds:
            return None, False
        lik = fixed_phi_likelihood(dm, mm, js, real, mm.phi_grid[0])
        hit = not lik.is_zero and proportional(lik, ignoring_likelihood(dm, real))
    elif target == "theorem2_dependent_prior":
        if len(dm.theta_grid) < 2 or len(mm.phi_grid) < 2 or not classify_realised_mar(mm, real).holds:
            return None, False
        if ignoring_likelihood(dm, real).is_zero:
            return None, False
        prior = dependent_prior(dm, mm)
        try:
            rep = verify_theorem2(dm, mm, js, real, prior, strict=False)
        except DomainError:  # zero evidence under the joint model
            return None, False
        hit = rep.tv != 0
        b = ModelBundle(b.space, dm, mm, js, real, prior=prior)
    elif target == "proportional_without_mar":
        if classify_realised_mar(mm, real).holds:
            return None, False
        l2 = ignoring_likelihood(dm, real)
        liks = [fixed_phi_likelihood(dm, mm, js, real, p) for p in mm.phi_grid]
        hit = all(not lk.is_zero and proportional(lk, l2) for lk in liks)
    elif target == "appendix_violation":
        rep = verify_appendix_theorem(dm, mm, js, real, strict=False)
        eligible = rep.hypotheses_hold
        hit = rep.hypotheses_hold and (
            not rep.biconditional_holds or (rep.proportional_all_phi and not rep.q_matches_g)
        )
    else:
        raise UsageError(f"unknown search target {target!r}; choose from {', '.join(TARGETS)}")
    return (b if hit else None), eligible


def _evaluate_chunk(args):
    target, start, chunk = args
    hits, eligible = [], 0
    for k, c in enumerate(chunk):
        b, ok = _evaluate(target, c)
        eligible += ok
        if b is not None:
            hits.append((start + k, c))
    return hits, eligible


@dataclass
class Instance:
    index: int
    candidate: Candidate
    bundle: ModelBundle
    verdicts: dict
    description: str


@dataclass
class SearchResult:
    target: str
    searched: int
    exhaustive_searched: int
    random_searched: int
    exhaustive_complete: bool
    n_hits: int
    instances: list
    eligible: int = 0  # candidates meeting the target's side conditions
    seed: int | None = None

    @property
    def certified_empty(self) -> bool:
        return self.n_hits == 0 and self.exhaustive_complete


def describe(c: Candidate) -> str:
    m = "".join(map(str, c.m))
    vals = "; ".join("(" + ", ".join(str(v) for v in vals) + ")" for vals in c.phi_values)
    which = "g(observed | y) for y = 0, 1" if c.full_kernel else f"g({m} | compatible y)"
    return f"{c.n_coords} binary coordinate(s), family {c.family!r}, y~={c.y}, m~={m}, {which} per phi: {vals}"


def search_counterexamples(
    target: str,
    space: SearchSpace | None = None,
    budget: int | None = None,
    seed: int = 0,
    max_hits: int | None = 10,
    workers: int = 1,
    chunk_size: int = 512,
) -> SearchResult:
    """Scan candidates for ``target``; returns at most ``max_hits`` instances (all if None)."""
    if target not in TARGETS:
        raise UsageError(f"unknown search target {target!r}; choose from {', '.join(TARGETS)}")
    space = space or SearchSpace()
    stream = itertools.chain(_exhaustive(space), _random(space, seed))
    n_exh = exhaustive_size(space)
    total = n_exh if budget is None else budget
    if total < 0:
        raise UsageError("budget must be nonnegative")

    hits: list = []
    searched = eligible = 0
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        while searched < total and (max_hits is None or len(hits) < max_hits):
            # a round of chunks, evaluated in parallel, consumed in index order
            batch = []
            for _ in range(max(1, workers)):
                n = min(chunk_size, total - searched - sum(len(b[2]) for b in batch))
                if n <= 0:
                    break
                start = searched + sum(len(b[2]) for b in batch)
                batch.append((target, start, list(itertools.islice(stream, n))))
            results = pool.map(_evaluate_chunk, batch) if pool else map(_evaluate_chunk, batch)
            for (_, _, chunk), found in zip(batch, results):
                searched += len(chunk)
                hits.extend(found[0])
                eligible += found[1]
    finally:
        if pool:
            pool.shutdown()
    n_hits = len(hits)
    if max_hits is not None:
        hits = hits[:max_hits]
    instances = []
    for idx, c in hits:
        b, _ = _evaluate(target, c)
        instances.append(Instance(idx, c, b, instance_verdicts(b), describe(c)))
    return SearchResult(
        target=target,
        searched=searched,
        exhaustive_searched=min(searched, n_exh),
        random_searched=max(0, searched - n_exh),
        exhaustive_complete=searched >= n_exh,
        n_hits=n_hits,
        eligible=eligible,
        instances=instances,
        seed=seed,
    )
