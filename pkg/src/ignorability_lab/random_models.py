"""Seeded generators of small random rational instances.

Used by the property tests and the acceptance suite.  All probabilities
are Fractions with small denominators, so downstream checks can be exact.
"""

from __future__ import annotations

import random
from fractions import Fraction

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

DENOMINATORS = (2, 3, 4, 6, 8)


def random_composition(rng: random.Random, parts: int, denominator: int, positive: bool = False) -> list[Fraction]:
    """``parts`` multiples of 1/denominator summing to 1."""
    if positive:
        denominator = max(denominator, parts)
        cuts = sorted(rng.sample(range(1, denominator), parts - 1))
    else:
        cuts = sorted(rng.randint(0, denominator) for _ in range(parts - 1))
    edges = [0] + cuts + [denominator]
    return [Fraction(edges[i + 1] - edges[i], denominator) for i in range(parts)]


def binary_space(n_coords: int) -> DataSpace:
    return DataSpace.from_supports([(0, 1)] * n_coords)


def random_data_model(
    rng: random.Random, space: DataSpace, n_theta: int, positive: bool = True
) -> DiscreteDataModel:
    d = rng.choice(DENOMINATORS) * space.size
    grid = [Fraction(i + 1, n_theta + 1) for i in range(n_theta)]
    return DiscreteDataModel(space, grid, [random_composition(rng, space.size, d, positive) for _ in grid])


def _kernel_from_rows(space: DataSpace, rows: dict) -> dict:
    """rows[y_index] = {pattern: prob}  ->  {pattern: column}."""
    pats = sorted({m for r in rows.values() for m in r}, key=lambda p: p.bits)
    return {m: tuple(rows[i].get(m, Fraction(0)) for i in range(space.size)) for m in pats}


def random_kernel(rng: random.Random, space: DataSpace, kind: str = "any") -> dict:
    """A random pattern kernel of the requested kind.

    ``"any"``: independent random pattern law per y.  ``"mcar"``: one law
    for all y.  ``"mar"``: coordinate 1 is always observed and the law of
    the rest depends on y only through coordinate 1.
    """
    n = space.n_coords
    d = rng.choice(DENOMINATORS)
    if kind == "any":
        pats = all_patterns(n)
        rows = {i: dict(zip(pats, random_composition(rng, len(pats), d))) for i in range(space.size)}
    elif kind == "mcar":
        pats = all_patterns(n)
        law = dict(zip(pats, random_composition(rng, len(pats), d)))
        rows = {i: law for i in range(space.size)}
    elif kind == "mar":
        pats = [p for p in all_patterns(n) if p.bits[0] == 1]
        by_first = {}
        rows = {}
        for i, y in enumerate(space.points):
            if y[0] not in by_first:
                by_first[y[0]] = dict(zip(pats, random_composition(rng, len(pats), d)))
            rows[i] = by_first[y[0]]
    else:
        raise ValueError(f"unknown kernel kind {kind!r}")
    return _kernel_from_rows(space, rows)


def random_missingness_model(
    rng: random.Random, space: DataSpace, n_phi: int, kind: str = "any"
) -> MissingnessModel:
    grid = [Fraction(j, n_phi + 1) for j in range(1, n_phi + 1)]
    return MissingnessModel(space, grid, [random_kernel(rng, space, kind) for _ in grid])


def random_realisation(rng: random.Random, mm: MissingnessModel, positive: bool = True) -> Realisation:
    """A random (y, m); with ``positive``, m has g_phi(m|y) > 0 at some phi."""
    space = mm.space
    i = rng.randrange(space.size)
    pats = all_patterns(space.n_coords)
    if positive:
        ok = [m for m in pats if any(mm.g(p, m, i) > 0 for p in mm.phi_grid)]
        pats = ok or pats
    return Realisation(space.points[i], rng.choice(pats))


def force_realised_mar(mm: MissingnessModel, real: Realisation) -> MissingnessModel:
    """Make g_phi(m~ | y) constant on the y compatible with the realisation.

    The realised pattern gets, at every compatible y, the value it has at
    y~; the difference is moved onto another pattern so columns still sum to 1.
    """
    space, m = mm.space, real.m_tilde
    obs = real.record.observed_values
    yi = space.index(real.y_tilde)
    other = Pattern(tuple(1 - b for b in m.bits)) if m.k < len(m) else Pattern((0,) * len(m))
    kernels = []
    for phi in mm.phi_grid:
        cols = {p: list(c) for p, c in mm.kernels[phi].items()}
        cols.setdefault(m, [Fraction(0)] * space.size)
        cols.setdefault(other, [Fraction(0)] * space.size)
        target = cols[m][yi]
        for i, y in enumerate(space.points):
            if extract_observed(y, m).observed_values != obs or i == yi:
                continue
            # g(m~|y) -> target; rescale the others to fill 1 - target
            rest = [p for p in cols if p != m]
            mass = sum(cols[p][i] for p in rest)
            for p in rest:
                cols[p][i] = (1 - target) * cols[p][i] / mass if mass else 0
            if not mass:
                cols[other][i] = 1 - target
            cols[m][i] = target
        kernels.append({p: tuple(c) for p, c in cols.items()})
    return MissingnessModel(space, mm.phi_grid, kernels)


def force_positive(mm: MissingnessModel, real: Realisation, value: Fraction = Fraction(1, 2)) -> MissingnessModel:
    """Ensure g_phi(m~ | y~) > 0 at every phi by mixing with ``value`` where it is 0."""
    space, m = mm.space, real.m_tilde
    yi = space.index(real.y_tilde)
    kernels = []
    for phi in mm.phi_grid:
        cols = {p: list(c) for p, c in mm.kernels[phi].items()}
        cols.setdefault(m, [Fraction(0)] * space.size)
        if cols[m][yi] == 0:
            for i in range(space.size):
                for p in cols:
                    cols[p][i] = cols[p][i] * (1 - value)
                cols[m][i] += value
        kernels.append({p: tuple(c) for p, c in cols.items()})
    return MissingnessModel(space, mm.phi_grid, kernels)


def random_mar_bundle(rng: random.Random, max_coords: int = 3) -> ModelBundle:
    """A random instance satisfying realised MAR, distinctness and positivity."""
    space = binary_space(rng.randint(1, max_coords))
    dm = random_data_model(rng, space, rng.randint(1, 3))
    mm = random_missingness_model(rng, space, rng.randint(1, 3), rng.choice(["any", "mcar", "mar"]))
    real = random_realisation(rng, mm)
    mm = force_positive(force_realised_mar(mm, real), real)
    return ModelBundle(space, dm, mm, JointParameterSpace.full(dm, mm), real)


def random_mcar_bundle(rng: random.Random, max_coords: int = 3) -> ModelBundle:
    """A random instance whose realised pattern has constant probability over y."""
    space = binary_space(rng.randint(1, max_coords))
    dm = random_data_model(rng, space, rng.randint(1, 3))
    mm = random_missingness_model(rng, space, rng.randint(1, 3), rng.choice(["any", "mcar"]))
    real = random_realisation(rng, mm)
    mm = force_realised_mcar(mm, real)
    return ModelBundle(space, dm, mm, JointParameterSpace.full(dm, mm), real)


def force_realised_mcar(mm: MissingnessModel, real: Realisation) -> MissingnessModel:
    """Give the realised pattern the value it has at y~ for every y."""
    space, m = mm.space, real.m_tilde
    yi = space.index(real.y_tilde)
    out = []
    for phi in mm.phi_grid:
        cols = {p: list(c) for p, c in mm.kernels[phi].items()}
        cols.setdefault(m, [Fraction(0)] * space.size)
        target = cols[m][yi]
        for i in range(space.size):
            rest = [p for p in cols if p != m]
            mass = sum(cols[p][i] for p in rest)
            if mass:
                for p in rest:
                    cols[p][i] = (1 - target) * cols[p][i] / mass
            else:
                other = Pattern(tuple(1 - b for b in m.bits)) if m.k < len(m) else Pattern((0,) * len(m))
                cols.setdefault(other, [Fraction(0)] * space.size)
                cols[other][i] = 1 - target
            cols[m][i] = target
        out.append({p: tuple(c) for p, c in cols.items()})
    return MissingnessModel(space, mm.phi_grid, out)


def random_independent_prior(rng: random.Random, dm: DiscreteDataModel, mm: MissingnessModel):
    from .bayes import Prior

    pt = random_composition(rng, len(dm.theta_grid), 4 * len(dm.theta_grid), positive=True)
    pp = random_composition(rng, len(mm.phi_grid), 4 * len(mm.phi_grid), positive=True)
    return Prior.product(dict(zip(dm.theta_grid, pt)), dict(zip(mm.phi_grid, pp)))
