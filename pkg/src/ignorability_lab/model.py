"""Finite discrete data models, missingness models and pattern machinery.

Everything here is immutable after construction.  Probability tables are
indexed positionally by the lexicographic enumeration of the data space,
so ``space.points[i]`` is the data vector behind ``table[i]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

from .errors import DomainError, ResourceError, StructuralError, UsageError
from .numeric import EQ_TOL, Number, all_exact, close, format_number, fsum_exact

DEFAULT_SPACE_CAP = 4096
MAX_PATTERN_COORDS = 16

Point = tuple  # a grid point: tuple of numbers
DataVector = tuple


# --------------------------------------------------------------------------
# grid points
# --------------------------------------------------------------------------


def as_point(value) -> Point:
    """Normalise a grid point: scalars become 1-tuples."""
    if isinstance(value, (tuple, list)):
        return tuple(value)
    return (value,)


def point_label(point: Point) -> str:
    return ",".join(str(format_number(v)) for v in point)


def _unique_points(grid: Iterable, what: str) -> tuple[Point, ...]:
    points = tuple(as_point(p) for p in grid)
    if not points:
        raise UsageError(f"{what} grid is empty")
    if len(set(points)) != len(points):
        raise StructuralError(f"{what} grid contains duplicate points")
    return points


# --------------------------------------------------------------------------
# data space and patterns
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Coordinate:
    name: str
    support: tuple

    def __post_init__(self):
        support = tuple(self.support)
        object.__setattr__(self, "support", support)
        if not support:
            raise StructuralError(f"coordinate {self.name!r} has an empty support")
        if len(set(support)) != len(support):
            raise StructuralError(f"coordinate {self.name!r} has duplicate support values")


@dataclass(frozen=True)
class DataSpace:
    """Cartesian product of finite coordinate supports, in lexicographic order.

    ``unit_space``/``n_units`` are set when the space was built from i.i.d.
    units; unit ``i`` then owns coordinates ``i*J .. (i+1)*J - 1``.
    """

    coordinates: tuple[Coordinate, ...]
    cap: int = DEFAULT_SPACE_CAP
    unit_space: DataSpace | None = None
    n_units: int = 1
    points: tuple[DataVector, ...] = field(init=False, repr=False, compare=False)
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coords = tuple(
            c if isinstance(c, Coordinate) else Coordinate(*c) for c in self.coordinates
        )
        object.__setattr__(self, "coordinates", coords)
        if not coords:
            raise StructuralError("a data space needs at least one coordinate")
        if len({c.name for c in coords}) != len(coords):
            raise StructuralError("coordinate names must be distinct")
        if len(coords) > MAX_PATTERN_COORDS:
            raise ResourceError(
                f"{len(coords)} coordinates exceeds the pattern-space cap of {MAX_PATTERN_COORDS}"
            )
        size = 1
        for c in coords:
            size *= len(c.support)
        if size > self.cap:
            raise ResourceError(f"data space has {size} points, cap is {self.cap}")
        points = tuple(itertools.product(*(c.support for c in coords)))
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(points)})

    @classmethod
    def from_supports(cls, supports: Sequence[Sequence], names: Sequence[str] | None = None, **kw):
        names = names or [f"Y{j + 1}" for j in range(len(supports))]
        return cls(tuple(Coordinate(n, tuple(s)) for n, s in zip(names, supports)), **kw)

    @classmethod
    def from_units(cls, unit_space: DataSpace, n_units: int, cap: int = DEFAULT_SPACE_CAP):
        if n_units < 1:
            raise UsageError("n_units must be at least 1")
        coords = tuple(
            Coordinate(f"{c.name}[{i + 1}]", c.support)
            for i in range(n_units)
            for c in unit_space.coordinates
        )
        return cls(coords, cap=cap, unit_space=unit_space, n_units=n_units)

    @property
    def n_coords(self) -> int:
        return len(self.coordinates)

    @property
    def size(self) -> int:
        return len(self.points)

    def index(self, y: Sequence) -> int:
        y = tuple(y)
        if len(y) != self.n_coords:
            raise StructuralError(f"data vector has length {len(y)}, space has {self.n_coords}")
        try:
            return self._index[y]
        except KeyError:
            raise DomainError(f"data vector {y!r} is not in the data space") from None

    def contains(self, y: Sequence) -> bool:
        return tuple(y) in self._index

    def split_units(self, y: Sequence) -> list[tuple]:
        if self.unit_space is None:
            raise UsageError("space has no unit structure")
        j = self.unit_space.n_coords
        y = tuple(y)
        return [y[i * j:(i + 1) * j] for i in range(self.n_units)]


@dataclass(frozen=True)
class Pattern:
    """Missingness indicators: bit ``j`` is 1 when coordinate ``j`` is observed."""

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise StructuralError(f"pattern bits must be 0/1, got {self.bits!r}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def parse(cls, value) -> Pattern:
        if isinstance(value, Pattern):
            return value
        if isinstance(value, str):
            text = value.replace(",", "").replace(" ", "")
            if not text or set(text) - {"0", "1"}:
                raise StructuralError(f"cannot parse pattern {value!r}")
            return cls(tuple(int(c) for c in text))
        return cls(tuple(value))

    @property
    def k(self) -> int:
        return sum(self.bits)

    def __len__(self):
        return len(self.bits)

    def __str__(self):
        return "".join(map(str, self.bits))

    @property
    def observed_positions(self) -> tuple[int, ...]:
        return tuple(j for j, b in enumerate(self.bits) if b)

    @property
    def missing_positions(self) -> tuple[int, ...]:
        return tuple(j for j, b in enumerate(self.bits) if not b)


def all_patterns(n_coords: int) -> list[Pattern]:
    """All 2^n patterns in lexicographic order, all-missing first."""
    if n_coords > MAX_PATTERN_COORDS:
        raise ResourceError(f"{n_coords} coordinates exceeds pattern cap {MAX_PATTERN_COORDS}")
    return [Pattern(bits) for bits in itertools.product((0, 1), repeat=n_coords)]


# --------------------------------------------------------------------------
# observed / missing extraction
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ObservedRecord:
    m_tilde: Pattern
    observed_values: tuple

    @property
    def k(self) -> int:
        return len(self.observed_values)


@dataclass(frozen=True)
class Realisation:
    y_tilde: DataVector
    m_tilde: Pattern

    def __post_init__(self):
        object.__setattr__(self, "y_tilde", tuple(self.y_tilde))
        object.__setattr__(self, "m_tilde", Pattern.parse(self.m_tilde))
        if len(self.y_tilde) != len(self.m_tilde):
            raise StructuralError("realised data vector and pattern lengths differ")

    @property
    def record(self) -> ObservedRecord:
        return extract_observed(self.y_tilde, self.m_tilde)


def _check_lengths(y, m: Pattern, space: DataSpace | None):
    if len(y) != len(m):
        raise StructuralError(f"data vector length {len(y)} != pattern length {len(m)}")
    if space is not None:
        space.index(y)


def extract_observed(y: Sequence, m, space: DataSpace | None = None) -> ObservedRecord:
    """o(y, m): the entries of ``y`` whose pattern bit is one, in coordinate order."""
    m = Pattern.parse(m)
    y = tuple(y)
    _check_lengths(y, m, space)
    return ObservedRecord(m, tuple(y[j] for j in m.observed_positions))


def extract_missing(y: Sequence, m, space: DataSpace | None = None) -> tuple:
    """mis(y, m): the entries of ``y`` whose pattern bit is zero."""
    m = Pattern.parse(m)
    y = tuple(y)
    _check_lengths(y, m, space)
    return tuple(y[j] for j in m.missing_positions)


def interleave(observed: Sequence, missing: Sequence, m) -> tuple:
    """Rebuild y from its observed and missing parts."""
    m = Pattern.parse(m)
    obs, mis = iter(observed), iter(missing)
    if len(observed) != m.k or len(missing) != len(m) - m.k:
        raise StructuralError("observed/missing parts do not match the pattern")
    return tuple(next(obs) if b else next(mis) for b in m.bits)


def compatible(y: Sequence, record: ObservedRecord, space: DataSpace | None = None) -> bool:
    """r(y, y~, m~): does y agree with the record on its observed coordinates?"""
    return extract_observed(y, record.m_tilde, space).observed_values == record.observed_values


def compatible_indices(space: DataSpace, record: ObservedRecord) -> list[int]:
    m = record.m_tilde
    if len(m) != space.n_coords:
        raise StructuralError("record pattern length does not match the data space")
    pos = m.observed_positions
    target = record.observed_values
    return [i for i, y in enumerate(space.points) if tuple(y[j] for j in pos) == target]


def enumerate_compatible(record: ObservedRecord, model, cap: int | None = None) -> list[DataVector]:
    """Every data vector consistent with ``record``, in enumeration order.

    ``model`` may be a :class:`DataSpace` or anything with a ``space``.
    """
    space = model if isinstance(model, DataSpace) else model.space
    m = record.m_tilde
    size = 1
    for j in m.missing_positions:
        size *= len(space.coordinates[j].support)
    cap = space.cap if cap is None else cap
    if size > cap:
        raise ResourceError(f"{size} compatible vectors exceeds cap {cap}")
    return [space.points[i] for i in compatible_indices(space, record)]


# --------------------------------------------------------------------------
# data and missingness models
# --------------------------------------------------------------------------


def _check_distribution(values: Sequence[Number], what: str, tol: float = EQ_TOL):
    for v in values:
        if v < 0:
            raise DomainError(f"{what}: negative probability {v}")
    total = fsum_exact(values)
    if not close(total, 1, tol):
        raise DomainError(f"{what}: probabilities sum to {format_number(total)}, expected 1")


def _aligned(grid: tuple[Point, ...], tables, what: str) -> dict[Point, Any]:
    if isinstance(tables, Mapping):
        out = {as_point(k): v for k, v in tables.items()}
        if set(out) != set(grid):
            raise StructuralError(f"{what} keys do not match the grid")
        return {p: out[p] for p in grid}
    tables = list(tables)
    if len(tables) != len(grid):
        raise StructuralError(f"{len(tables)} {what} for a grid of {len(grid)} points")
    return dict(zip(grid, tables))


@dataclass(frozen=True)
class DiscreteDataModel:
    """theta-indexed family of probability tables f_theta over ``space``."""

    space: DataSpace
    theta_grid: tuple[Point, ...]
    tables: Mapping[Point, tuple]
    unit_tables: Mapping[Point, tuple] | None = None

    def __post_init__(self):
        grid = _unique_points(self.theta_grid, "theta")
        object.__setattr__(self, "theta_grid", grid)
        tables = {}
        for theta, table in _aligned(grid, self.tables, "data tables").items():
            table = tuple(table)
            if len(table) != self.space.size:
                raise StructuralError(
                    f"table for theta={point_label(theta)} has {len(table)} entries, "
                    f"space has {self.space.size}"
                )
            _check_distribution(table, f"f_theta at theta={point_label(theta)}")
            tables[theta] = table
        object.__setattr__(self, "tables", tables)

    @classmethod
    def from_function(cls, space: DataSpace, theta_grid: Iterable, fn: Callable) -> DiscreteDataModel:
        """Build tables from ``fn(theta, y) -> probability``; theta is passed as a tuple."""
        grid = _unique_points(theta_grid, "theta")
        return cls(space, grid, {t: tuple(fn(t, y) for y in space.points) for t in grid})

    @classmethod
    def from_iid(cls, unit_model: DiscreteDataModel, n_units: int) -> DiscreteDataModel:
        space = DataSpace.from_units(unit_model.space, n_units)
        tables = {}
        for theta in unit_model.theta_grid:
            unit = unit_model.tables[theta]
            tables[theta] = tuple(
                _product(unit[unit_model.space.index(u)] for u in space.split_units(y))
                for y in space.points
            )
        return cls(space, unit_model.theta_grid, tables, unit_tables=dict(unit_model.tables))

    @property
    def exact(self) -> bool:
        return all(all_exact(t) for t in self.tables.values())

    def table(self, theta) -> tuple:
        try:
            return self.tables[as_point(theta)]
        except KeyError:
            raise UsageError(f"theta={theta!r} is not on the grid") from None

    def prob(self, theta, y) -> Number:
        return self.table(theta)[self.space.index(y)]


def _product(values: Iterable[Number]) -> Number:
    out: Number = 1
    for v in values:
        out = out * v
    return out


def _iid_kernels(us: DataSpace, unit_kernels: Mapping, space: DataSpace) -> dict:
    """Product kernels over ``space`` from per-unit kernels over ``us``."""
    kernels = {}
    for phi, unit in unit_kernels.items():
        cols = {}
        for combo in itertools.product(list(unit), repeat=space.n_units):
            m = Pattern(tuple(b for p in combo for b in p.bits))
            cols[m] = tuple(
                _product(unit[p][us.index(u)] for p, u in zip(combo, space.split_units(y)))
                for y in space.points
            )
        kernels[phi] = cols
    return kernels


@dataclass(frozen=True)
class IIDStructure:
    """Per-unit factorisation of a missingness model over ``n_units`` units."""

    unit_space: DataSpace
    n_units: int
    unit_kernels: Mapping[Point, Mapping[Pattern, tuple]]


@dataclass(frozen=True)
class MissingnessModel:
    """phi-indexed family of pattern distributions g_phi(m | y).

    ``kernels[phi][pattern]`` is the column of g_phi(pattern | y) over the
    space enumeration.  Patterns not listed have probability zero.
    """

    space: DataSpace
    phi_grid: tuple[Point, ...]
    kernels: Mapping[Point, Mapping[Pattern, tuple]]
    iid: IIDStructure | None = None

    def __post_init__(self):
        grid = _unique_points(self.phi_grid, "phi")
        object.__setattr__(self, "phi_grid", grid)
        n = self.space.n_coords
        kernels = {}
        for phi, kernel in _aligned(grid, self.kernels, "kernels").items():
            cols = {}
            for m, col in kernel.items():
                m = Pattern.parse(m)
                if len(m) != n:
                    raise StructuralError(f"pattern {m} has length {len(m)}, space has {n}")
                col = tuple(col)
                if len(col) != self.space.size:
                    raise StructuralError(
                        f"kernel column for pattern {m} at phi={point_label(phi)} has "
                        f"{len(col)} entries, space has {self.space.size}"
                    )
                if m in cols:
                    raise StructuralError(f"pattern {m} listed twice at phi={point_label(phi)}")
                cols[m] = col
            # sort patterns so iteration order is the lexicographic pattern order
            kernels[phi] = {m: cols[m] for m in sorted(cols, key=lambda p: p.bits)}
            for i, y in enumerate(self.space.points):
                _check_distribution(
                    [c[i] for c in kernels[phi].values()] or [0],
                    f"g_phi(. | y={y}) at phi={point_label(phi)}",
                )
        object.__setattr__(self, "kernels", kernels)
        if self.iid is not None:
            self._check_iid()

    @classmethod
    def from_function(
        cls, space: DataSpace, phi_grid: Iterable, fn: Callable, patterns: Iterable | None = None
    ) -> MissingnessModel:
        """Build kernels from ``fn(phi, m, y) -> probability``."""
        grid = _unique_points(phi_grid, "phi")
        pats = [Pattern.parse(p) for p in patterns] if patterns is not None else all_patterns(space.n_coords)
        kernels = {}
        for phi in grid:
            kernels[phi] = {m: tuple(fn(phi, m, y) for y in space.points) for m in pats}
        return cls(space, grid, kernels)

    @classmethod
    def from_iid(cls, unit_model: MissingnessModel, n_units: int) -> MissingnessModel:
        space = DataSpace.from_units(unit_model.space, n_units)
        kernels = _iid_kernels(unit_model.space, unit_model.kernels, space)
        iid = IIDStructure(unit_model.space, n_units, dict(unit_model.kernels))
        return cls(space, unit_model.phi_grid, kernels, iid=iid)

    def _check_iid(self):
        iid = self.iid
        if self.space.unit_space is None or self.space.n_units != iid.n_units:
            raise StructuralError("iid structure does not match the space's unit layout")
        unit = MissingnessModel(iid.unit_space, self.phi_grid, iid.unit_kernels)
        expanded = _iid_kernels(unit.space, unit.kernels, self.space)
        for phi in self.phi_grid:
            mine, theirs = self.kernels[phi], expanded[phi]
            for m in set(mine) | set(theirs):
                zero = (0,) * self.space.size
                for y, a, b in zip(self.space.points, mine.get(m, zero), theirs.get(m, zero)):
                    if not close(a, b):
                        raise DomainError(
                            f"kernel at phi={point_label(phi)}, m={m}, y={y} is {a}, "
                            f"but the per-unit product gives {b}"
                        )

    @property
    def exact(self) -> bool:
        return all(all_exact(c) for k in self.kernels.values() for c in k.values())

    def unit_model(self) -> MissingnessModel:
        if self.iid is None:
            raise UsageError("missingness model has no i.i.d. structure")
        return MissingnessModel(self.iid.unit_space, self.phi_grid, self.iid.unit_kernels)

    def patterns(self, phi) -> list[Pattern]:
        return list(self.kernels[as_point(phi)])

    def column(self, phi, m) -> tuple:
        """g_phi(m | y) for every y in enumeration order."""
        phi = as_point(phi)
        if phi not in self.kernels:
            raise UsageError(f"phi={phi!r} is not on the grid")
        m = Pattern.parse(m)
        col = self.kernels[phi].get(m)
        if col is None:
            if len(m) != self.space.n_coords:
                raise StructuralError("pattern length does not match the data space")
            return (0,) * self.space.size
        return col

    def g(self, phi, m, y) -> Number:
        """g_phi(m | y); ``y`` may be a data vector or an enumeration index."""
        i = y if isinstance(y, int) else self.space.index(y)
        return self.column(phi, m)[i]


# --------------------------------------------------------------------------
# parameter space, conditioning, bundle
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class JointParameterSpace:
    theta_grid: tuple[Point, ...]
    phi_grid: tuple[Point, ...]
    members: frozenset | None = None

    def __post_init__(self):
        object.__setattr__(self, "theta_grid", _unique_points(self.theta_grid, "theta"))
        object.__setattr__(self, "phi_grid", _unique_points(self.phi_grid, "phi"))
        full = {(t, p) for t in self.theta_grid for p in self.phi_grid}
        if self.members is None:
            members = frozenset(full)
        else:
            members = frozenset((as_point(t), as_point(p)) for t, p in self.members)
            extra = members - full
            if extra:
                raise StructuralError(f"joint space has pairs outside the product grid: {sorted(extra)[:3]}")
        if not members:
            raise UsageError("joint parameter space is empty")
        object.__setattr__(self, "members", members)

    @classmethod
    def full(cls, dm: DiscreteDataModel, mm: MissingnessModel) -> JointParameterSpace:
        return cls(dm.theta_grid, mm.phi_grid)

    @property
    def is_distinct(self) -> bool:
        return len(self.members) == len(self.theta_grid) * len(self.phi_grid)

    def contains(self, theta, phi) -> bool:
        """The membership indicator delta{(theta, phi), Omega}."""
        return (as_point(theta), as_point(phi)) in self.members

    @property
    def pairs(self) -> list[tuple[Point, Point]]:
        """Members in theta-major product order."""
        return [(t, p) for t in self.theta_grid for p in self.phi_grid if (t, p) in self.members]


@dataclass(frozen=True)
class ConditioningFunction:
    """X = b(Y) as an explicit table over the data space, with realised label."""

    space: DataSpace
    labels: tuple[Hashable, ...]
    x_tilde: Hashable

    def __post_init__(self):
        labels = tuple(self.labels)
        if len(labels) != self.space.size:
            raise StructuralError("conditioning function must label every point of the space")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_callable(cls, space: DataSpace, b: Callable, x_tilde) -> ConditioningFunction:
        return cls(space, tuple(b(y) for y in space.points), x_tilde)

    @classmethod
    def projection(cls, space: DataSpace, coords: Sequence[int], x_tilde) -> ConditioningFunction:
        coords = tuple(coords)
        x = tuple(x_tilde) if isinstance(x_tilde, (list, tuple)) else (x_tilde,)
        return cls.from_callable(space, lambda y: tuple(y[j] for j in coords), x)

    def b(self, y) -> Hashable:
        i = y if isinstance(y, int) else self.space.index(y)
        return self.labels[i]

    def fiber(self, x=None) -> list[int]:
        x = self.x_tilde if x is None else x
        return [i for i, lab in enumerate(self.labels) if lab == x]

    @property
    def levels(self) -> list:
        seen = []
        for lab in self.labels:
            if lab not in seen:
                seen.append(lab)
        return seen


@dataclass(frozen=True)
class ModelBundle:
    """A fully validated model-spec document."""

    space: DataSpace
    data_model: DiscreteDataModel | None = None
    missingness_model: MissingnessModel | None = None
    joint_space: JointParameterSpace | None = None
    realisation: Realisation | None = None
    conditioning: ConditioningFunction | None = None
    prior: Any = None  # a bayes.Prior when the document carries one

    def require(self, *names: str):
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise UsageError(f"model spec lacks required section(s): {', '.join(missing)}")
