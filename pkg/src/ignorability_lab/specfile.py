"""JSON model-spec documents: validation, loading and writing.

A document looks like::

    {
      "space": {"coordinates": [{"name": "Y1", "support": [0, 1]}]},
      "data_model": {"theta_grid": ["1/4", "3/4"], "tables": [["3/4", "1/4"], ["1/4", "3/4"]]},
      "missingness_model": {"phi_grid": ["1/2"], "kernels": [{"1": ["1/2", "1/2"], "0": ["1/2", "1/2"]}]},
      "realisation": {"y": [1], "m": "1"}
    }

``space`` may instead give ``unit_coordinates`` and ``n_units``; the data
and missingness models may then use ``iid`` blocks with per-unit tables.
Probabilities are ``"p/q"`` strings (exact) or JSON numbers (float).
Validation is all-or-nothing: every problem is collected with its JSON
path and raised together as a :class:`ValidationError`.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

import jsonschema

from .errors import LabError, ValidationError
from .model import (
    ConditioningFunction,
    DataSpace,
    DiscreteDataModel,
    JointParameterSpace,
    MissingnessModel,
    ModelBundle,
    Pattern,
    Realisation,
    point_label,
)
from .numeric import EQ_TOL, all_exact, close, format_number, fsum_exact, parse_number, to_mode

_NUM = {"type": ["number", "string"]}
_POINT = {"anyOf": [_NUM, {"type": "array", "items": _NUM, "minItems": 1}]}
_VALUE = {"type": ["integer", "number", "string"]}
_LABEL = {"anyOf": [_VALUE, {"type": "array", "items": _VALUE}]}
_TABLE = {"type": "array", "items": _NUM, "minItems": 1}
_KERNEL = {
    "type": "object",
    "patternProperties": {"^[01]+$": _TABLE},
    "additionalProperties": False,
    "minProperties": 1,
}
_COORDS = {
    "type": "array",
    "minItems": 1,
    "items": {
        "type": "object",
        "properties": {"name": {"type": "string"}, "support": {"type": "array", "items": _VALUE, "minItems": 1}},
        "required": ["name", "support"],
        "additionalProperties": False,
    },
}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "properties": {
        "description": {"type": "string"},
        "space": {
            "type": "object",
            "properties": {
                "coordinates": _COORDS,
                "unit_coordinates": _COORDS,
                "n_units": {"type": "integer", "minimum": 1},
                "cap": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "data_model": {
            "type": "object",
            "properties": {
                "theta_grid": {"type": "array", "items": _POINT, "minItems": 1},
                "tables": {"type": "array", "items": _TABLE},
                "iid": {
                    "type": "object",
                    "properties": {"unit_tables": {"type": "array", "items": _TABLE}},
                    "required": ["unit_tables"],
                    "additionalProperties": False,
                },
            },
            "required": ["theta_grid"],
            "additionalProperties": False,
        },
        "missingness_model": {
            "type": "object",
            "properties": {
                "phi_grid": {"type": "array", "items": _POINT, "minItems": 1},
                "kernels": {"type": "array", "items": _KERNEL},
                "iid": {
                    "type": "object",
                    "properties": {"unit_kernels": {"type": "array", "items": _KERNEL}},
                    "required": ["unit_kernels"],
                    "additionalProperties": False,
                },
            },
            "required": ["phi_grid"],
            "additionalProperties": False,
        },
        "joint_parameter_space": {
            "type": "object",
            "properties": {
                "members": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2},
                }
            },
            "required": ["members"],
            "additionalProperties": False,
        },
        "realisation": {
            "type": "object",
            "properties": {"y": {"type": "array", "items": _VALUE}, "m": {"type": "string", "pattern": "^[01]+$"}},
            "required": ["y", "m"],
            "additionalProperties": False,
        },
        "conditioning": {
            "type": "object",
            "properties": {
                "coordinates": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
                "table": {"type": "object", "additionalProperties": _LABEL},
                "x_tilde": _LABEL,
            },
            "required": ["x_tilde"],
            "additionalProperties": False,
        },
        "prior": {
            "type": "object",
            "properties": {
                "theta": {"type": "array", "items": _NUM},
                "phi": {"type": "array", "items": _NUM},
                "table": {"type": "array", "items": {"type": "array", "items": _NUM}},
            },
            "additionalProperties": False,
        },
    },
    "required": ["space"],
    "additionalProperties": False,
}


def _path(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _label(v):
    return tuple(v) if isinstance(v, list) else v


class _Collector:
    """Accumulates path-addressed errors while parsing."""

    def __init__(self, mode: str | None):
        self.errors: list[str] = []
        self.mode = mode

    def error(self, path, msg: str):
        self.errors.append(f"{_path(path)}: {msg}")

    def number(self, raw, path):
        try:
            return to_mode(parse_number(raw), self.mode)
        except (ValueError, ZeroDivisionError):
            self.error(path, f"cannot parse {raw!r} as a number")
            return None

    def point(self, raw, path):
        items = raw if isinstance(raw, list) else [raw]
        vals = [self.number(v, list(path) + [j]) for j, v in enumerate(items)]
        return None if any(v is None for v in vals) else tuple(vals)

    def grid(self, raw, path, what):
        pts = [self.point(p, list(path) + [i]) for i, p in enumerate(raw)]
        if any(p is None for p in pts):
            return None
        if len({len(p) for p in pts}) > 1:
            self.error(path, f"{what} grid mixes points of different dimension")
            return None
        if len(set(pts)) != len(pts):
            self.error(path, f"{what} grid contains duplicate points")
            return None
        return pts

    def distribution(self, raw, path, size, what):
        if len(raw) != size:
            self.error(path, f"{what} has {len(raw)} entries, expected {size}")
            return None
        vals = [self.number(v, list(path) + [j]) for j, v in enumerate(raw)]
        if any(v is None for v in vals):
            return None
        bad = [j for j, v in enumerate(vals) if v < 0]
        for j in bad:
            self.error(list(path) + [j], f"negative probability {format_number(vals[j])}")
        total = fsum_exact(vals)
        if not close(total, 1, EQ_TOL):
            self.error(path, f"{what} sums to {format_number(total)}, expected 1")
            return None
        return None if bad else tuple(vals)


def _space(doc, c: _Collector):
    sec = doc["space"]
    cap = sec.get("cap")
    kw = {"cap": cap} if cap else {}
    try:
        if "coordinates" in sec and "unit_coordinates" not in sec:
            coords = sec["coordinates"]
            return DataSpace.from_supports([x["support"] for x in coords], [x["name"] for x in coords], **kw)
        if "unit_coordinates" in sec and "coordinates" not in sec:
            if "n_units" not in sec:
                c.error(["space"], "unit_coordinates needs n_units")
                return None
            coords = sec["unit_coordinates"]
            unit = DataSpace.from_supports([x["support"] for x in coords], [x["name"] for x in coords])
            return DataSpace.from_units(unit, sec["n_units"], **kw)
    except LabError as exc:
        c.error(["space"], str(exc))
        return None
    c.error(["space"], "give exactly one of 'coordinates' or 'unit_coordinates'")
    return None


def _one_of(sec, keys, path, c: _Collector):
    present = [k for k in keys if k in sec]
    if len(present) != 1:
        c.error(path, f"give exactly one of {', '.join(map(repr, keys))}")
        return None
    return present[0]


def _data_model(doc, space: DataSpace, c: _Collector):
    sec = doc["data_model"]
    grid = c.grid(sec["theta_grid"], ["data_model", "theta_grid"], "theta")
    kind = _one_of(sec, ("tables", "iid"), ["data_model"], c)
    if grid is None or kind is None:
        return None
    if kind == "iid":
        if space.unit_space is None:
            c.error(["data_model", "iid"], "an iid data model needs a space with unit_coordinates")
            return None
        raw, base, target = sec["iid"]["unit_tables"], ["data_model", "iid", "unit_tables"], space.unit_space
    else:
        raw, base, target = sec["tables"], ["data_model", "tables"], space
    if len(raw) != len(grid):
        c.error(base, f"{len(raw)} tables for a theta grid of {len(grid)} points")
        return None
    tables = [
        c.distribution(t, base + [i], target.size, f"f_theta at theta={point_label(grid[i])}")
        for i, t in enumerate(raw)
    ]
    if any(t is None for t in tables):
        return None
    try:
        if kind == "iid":
            unit = DiscreteDataModel(space.unit_space, grid, tables)
            return DiscreteDataModel.from_iid(unit, space.n_units)
        return DiscreteDataModel(space, grid, tables)
    except LabError as exc:
        c.error(["data_model"], str(exc))
        return None


def _kernels(raw, base, grid, target: DataSpace, c: _Collector):
    if len(raw) != len(grid):
        c.error(base, f"{len(raw)} kernels for a phi grid of {len(grid)} points")
        return None
    out, ok = [], True
    for i, kernel in enumerate(raw):
        phi = point_label(grid[i])
        cols = {}
        for pat, col in kernel.items():
            path = base + [i, pat]
            if len(pat) != target.n_coords:
                c.error(path, f"pattern has length {len(pat)}, space has {target.n_coords} coordinates")
                ok = False
                continue
            if len(col) != target.size:
                c.error(path, f"column has {len(col)} entries, expected {target.size}")
                ok = False
                continue
            vals = [c.number(v, path + [j]) for j, v in enumerate(col)]
            if any(v is None for v in vals):
                ok = False
                continue
            for j, v in enumerate(vals):
                if v < 0:
                    c.error(path + [j], f"negative probability {format_number(v)}")
                    ok = False
            cols[Pattern.parse(pat)] = tuple(vals)
        if not ok:
            continue
        for j, y in enumerate(target.points):
            total = fsum_exact(col[j] for col in cols.values())
            if not close(total, 1, EQ_TOL):
                c.error(
                    base + [i],
                    f"g_phi(. | y) sums to {format_number(total)} at phi={phi}, y=({point_label(y)}); expected 1",
                )
                ok = False
        out.append(cols)
    return out if ok else None


def _missingness_model(doc, space: DataSpace, c: _Collector):
    sec = doc["missingness_model"]
    grid = c.grid(sec["phi_grid"], ["missingness_model", "phi_grid"], "phi")
    kind = _one_of(sec, ("kernels", "iid"), ["missingness_model"], c)
    if grid is None or kind is None:
        return None
    if kind == "iid":
        if space.unit_space is None:
            c.error(["missingness_model", "iid"], "an iid mechanism needs a space with unit_coordinates")
            return None
        base = ["missingness_model", "iid", "unit_kernels"]
        kernels = _kernels(sec["iid"]["unit_kernels"], base, grid, space.unit_space, c)
    else:
        kernels = _kernels(sec["kernels"], ["missingness_model", "kernels"], grid, space, c)
    if kernels is None:
        return None
    try:
        if kind == "iid":
            unit = MissingnessModel(space.unit_space, grid, kernels)
            return MissingnessModel.from_iid(unit, space.n_units)
        return MissingnessModel(space, grid, kernels)
    except LabError as exc:
        c.error(["missingness_model"], str(exc))
        return None


def _joint_space(doc, dm, mm, c: _Collector):
    if dm is None or mm is None:
        return None
    sec = doc.get("joint_parameter_space")
    if sec is None:
        return JointParameterSpace.full(dm, mm)
    members = []
    for k, (ti, pj) in enumerate(sec["members"]):
        if ti >= len(dm.theta_grid) or pj >= len(mm.phi_grid):
            c.error(["joint_parameter_space", "members", k], f"index pair ({ti}, {pj}) is off the grids")
            continue
        members.append((dm.theta_grid[ti], mm.phi_grid[pj]))
    if not members:
        c.error(["joint_parameter_space", "members"], "joint parameter space is empty")
        return None
    return JointParameterSpace(dm.theta_grid, mm.phi_grid, members)


def _realisation(doc, space: DataSpace, c: _Collector):
    sec = doc["realisation"]
    y, m = tuple(sec["y"]), sec["m"]
    ok = True
    if len(y) != space.n_coords:
        c.error(["realisation", "y"], f"has length {len(y)}, space has {space.n_coords} coordinates")
        ok = False
    elif not space.contains(y):
        c.error(["realisation", "y"], f"{list(y)} is not in the data space")
        ok = False
    if len(m) != space.n_coords:
        c.error(["realisation", "m"], f"pattern has length {len(m)}, space has {space.n_coords} coordinates")
        ok = False
    return Realisation(y, m) if ok else None


def _conditioning(doc, space: DataSpace, c: _Collector):
    sec = doc["conditioning"]
    kind = _one_of(sec, ("coordinates", "table"), ["conditioning"], c)
    if kind is None:
        return None
    if kind == "coordinates":
        bad = [j for j in sec["coordinates"] if j >= space.n_coords]
        if bad:
            c.error(["conditioning", "coordinates"], f"coordinate index {bad[0]} is out of range")
            return None
        cond = ConditioningFunction.projection(space, sec["coordinates"], sec["x_tilde"])
    else:
        table = sec["table"]
        labels = []
        for y in space.points:
            key = point_label(y)
            if key not in table:
                c.error(["conditioning", "table"], f"no label for y=({key})")
                return None
            labels.append(_label(table[key]))
        extra = set(table) - {point_label(y) for y in space.points}
        if extra:
            c.error(["conditioning", "table"], f"labels for points outside the space: {sorted(extra)[:3]}")
            return None
        cond = ConditioningFunction(space, tuple(labels), _label(sec["x_tilde"]))
    if cond.x_tilde not in cond.levels:
        c.error(["conditioning", "x_tilde"], f"{sec['x_tilde']!r} is not a level of b")
        return None
    return cond


def _prior(doc, dm, mm, c: _Collector):
    from .bayes import Prior

    sec = doc["prior"]
    if dm is None or mm is None:
        c.error(["prior"], "a prior needs both data_model and missingness_model")
        return None
    kind = _one_of(sec, ("table", "theta"), ["prior"], c)
    if kind is None:
        return None
    nt, npf = len(dm.theta_grid), len(mm.phi_grid)
    if kind == "theta":
        if "phi" not in sec:
            c.error(["prior"], "a product prior needs both 'theta' and 'phi'")
            return None
        pt = c.distribution(sec["theta"], ["prior", "theta"], nt, "theta prior")
        pp = c.distribution(sec["phi"], ["prior", "phi"], npf, "phi prior")
        if pt is None or pp is None:
            return None
        return Prior.product(dict(zip(dm.theta_grid, pt)), dict(zip(mm.phi_grid, pp)))
    rows = sec["table"]
    if len(rows) != nt or any(len(r) != npf for r in rows):
        c.error(["prior", "table"], f"expected a {nt} x {npf} table (theta rows, phi columns)")
        return None
    flat = c.distribution([v for r in rows for v in r], ["prior", "table"], nt * npf, "prior table")
    if flat is None:
        return None
    pairs = [(t, p) for t in dm.theta_grid for p in mm.phi_grid]
    return Prior(dict(zip(pairs, flat)))


def validate(doc: Any, mode: str | None = None) -> ModelBundle:
    """Build a :class:`ModelBundle` or raise :class:`ValidationError` with every problem."""
    if mode not in (None, "rational", "float"):
        raise ValidationError([f"$: unknown arithmetic mode {mode!r}"])
    schema_errors = sorted(
        jsonschema.Draft202012Validator(SCHEMA).iter_errors(doc), key=lambda e: list(e.absolute_path)
    )
    if schema_errors:
        raise ValidationError([f"{_path(e.absolute_path)}: {e.message}" for e in schema_errors])
    c = _Collector(mode)
    space = _space(doc, c)
    if space is None:
        raise ValidationError(c.errors)
    dm = _data_model(doc, space, c) if "data_model" in doc else None
    mm = _missingness_model(doc, space, c) if "missingness_model" in doc else None
    js = _joint_space(doc, dm, mm, c)
    real = _realisation(doc, space, c) if "realisation" in doc else None
    cond = _conditioning(doc, space, c) if "conditioning" in doc else None
    prior = _prior(doc, dm, mm, c) if "prior" in doc else None
    if c.errors:
        raise ValidationError(c.errors)
    return ModelBundle(space, dm, mm, js, real, cond, prior)


def read_document(path: str | Path) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError([f"line {exc.lineno}, column {exc.colno}: {exc.msg}"]) from None


def load(path: str | Path, mode: str | None = None) -> ModelBundle:
    return validate(read_document(path), mode)


# --------------------------------------------------------------------------
# writing
# --------------------------------------------------------------------------


def _num(x):
    return format_number(Fraction(x)) if isinstance(x, int) else format_number(x)


def _num_out(x):
    # strings keep exact values exact when read back
    v = _num(x)
    return str(v) if isinstance(v, int) else v


def _grid_out(grid):
    return [_num_out(p[0]) if len(p) == 1 else [_num_out(v) for v in p] for p in grid]


def _coords_out(space: DataSpace):
    return [{"name": c.name, "support": list(c.support)} for c in space.coordinates]


def _kernels_out(kernels, grid):
    return [{str(m): [_num_out(v) for v in col] for m, col in kernels[phi].items()} for phi in grid]


def to_document(bundle: ModelBundle, description: str | None = None) -> dict:
    """Inverse of :func:`validate` (up to float formatting)."""
    doc: dict[str, Any] = {}
    if description:
        doc["description"] = description
    space, dm, mm = bundle.space, bundle.data_model, bundle.missingness_model
    iid = (
        space.unit_space is not None
        and (dm is None or dm.unit_tables is not None)
        and (mm is None or mm.iid is not None)
    )
    if iid:
        doc["space"] = {"unit_coordinates": _coords_out(space.unit_space), "n_units": space.n_units}
    else:
        doc["space"] = {"coordinates": _coords_out(space)}
    if space.cap != DataSpace.__dataclass_fields__["cap"].default:
        doc["space"]["cap"] = space.cap
    if dm is not None:
        sec = {"theta_grid": _grid_out(dm.theta_grid)}
        if iid:
            sec["iid"] = {"unit_tables": [[_num_out(v) for v in dm.unit_tables[t]] for t in dm.theta_grid]}
        else:
            sec["tables"] = [[_num_out(v) for v in dm.tables[t]] for t in dm.theta_grid]
        doc["data_model"] = sec
    if mm is not None:
        sec = {"phi_grid": _grid_out(mm.phi_grid)}
        if iid:
            sec["iid"] = {"unit_kernels": _kernels_out(mm.iid.unit_kernels, mm.phi_grid)}
        else:
            sec["kernels"] = _kernels_out(mm.kernels, mm.phi_grid)
        doc["missingness_model"] = sec
    js = bundle.joint_space
    if js is not None and not js.is_distinct:
        doc["joint_parameter_space"] = {
            "members": [[js.theta_grid.index(t), js.phi_grid.index(p)] for t, p in js.pairs]
        }
    if bundle.realisation is not None:
        doc["realisation"] = {"y": list(bundle.realisation.y_tilde), "m": str(bundle.realisation.m_tilde)}
    cond = bundle.conditioning
    if cond is not None:
        x = cond.x_tilde
        doc["conditioning"] = {
            "table": {point_label(y): list(lab) if isinstance(lab, tuple) else lab
                      for y, lab in zip(space.points, cond.labels)},
            "x_tilde": list(x) if isinstance(x, tuple) else x,
        }
    if bundle.prior is not None and dm is not None and mm is not None:
        doc["prior"] = {
            "table": [[_num_out(bundle.prior.table.get((t, p), 0)) for p in mm.phi_grid] for t in dm.theta_grid]
        }
    return doc


def dump(bundle: ModelBundle, path: str | Path, description: str | None = None) -> None:
    Path(path).write_text(json.dumps(to_document(bundle, description), indent=2) + "\n")


def is_exact_bundle(bundle: ModelBundle) -> bool:
    parts = []
    if bundle.data_model is not None:
        parts.append(bundle.data_model.exact)
        parts.append(all(all_exact(p) for p in bundle.data_model.theta_grid))
    if bundle.missingness_model is not None:
        parts.append(bundle.missingness_model.exact)
    return all(parts)


# --------------------------------------------------------------------------
# stand-alone prior files and simulation plans
# --------------------------------------------------------------------------


def _schema_errors(doc, schema) -> list[str]:
    errs = sorted(jsonschema.Draft202012Validator(schema).iter_errors(doc), key=lambda e: list(e.absolute_path))
    return [f"{_path(e.absolute_path)}: {e.message}" for e in errs]


def validate_prior(doc: Any, dm: DiscreteDataModel, mm: MissingnessModel, mode: str | None = None):
    """A prior document ``{"prior": {...}}`` (or the bare block) against given grids."""
    if isinstance(doc, dict) and "prior" not in doc:
        doc = {"prior": doc}
    schema = {
        "type": "object",
        "properties": {"prior": SCHEMA["properties"]["prior"]},
        "required": ["prior"],
        "additionalProperties": False,
    }
    errors = _schema_errors(doc, schema)
    if errors:
        raise ValidationError(errors)
    c = _Collector(mode)
    prior = _prior(doc, dm, mm, c)
    if c.errors:
        raise ValidationError(c.errors)
    return prior


def load_prior(path: str | Path, dm: DiscreteDataModel, mm: MissingnessModel, mode: str | None = None):
    return validate_prior(read_document(path), dm, mm, mode)


PLAN_SCHEMA: dict[str, Any] = {
    "type": "object",
    "properties": {
        "description": {"type": "string"},
        "builtin": {"type": "string"},
        "grid_denominator": {"type": "integer", "minimum": 2},
        "unit_model": {"type": "object"},
        "theta_true": _POINT,
        "phi_true": _POINT,
        "n_units": {"type": "integer", "minimum": 1},
        "n_replications": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "intervals": {"type": "array", "items": {"type": "string"}},
        "level": _NUM,
        "likelihood_cutoff": _NUM,
        "conditioning": {"enum": ["none", "pattern", "covariate"]},
        "context_counts": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 0}},
        "check_profile_mle": {"type": "boolean"},
        "chunk_size": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}


def validate_plan(doc: Any, mode: str | None = None):
    """Build a :class:`SimulationPlan` from a plan document.

    Either ``builtin`` names a shipped plan (other keys override its
    settings) or ``unit_model`` is a per-unit model document, in which
    case ``theta_true``, ``phi_true``, ``n_units`` and ``n_replications``
    are required.
    """
    from dataclasses import replace

    from .errors import UsageError
    from .simulate import BUILTIN_PLANS, SimulationPlan

    errors = _schema_errors(doc, PLAN_SCHEMA)
    if errors:
        raise ValidationError(errors)
    if ("builtin" in doc) == ("unit_model" in doc):
        raise ValidationError(["$: give exactly one of 'builtin' or 'unit_model'"])
    c = _Collector(mode)
    kw: dict[str, Any] = {}
    for key in ("n_units", "n_replications", "seed", "conditioning", "check_profile_mle", "chunk_size"):
        if key in doc:
            kw[key] = doc[key]
    if "intervals" in doc:
        kw["intervals"] = tuple(doc["intervals"])
    for key in ("level", "likelihood_cutoff"):
        if key in doc:
            kw[key] = c.number(doc[key], [key])
    for key in ("theta_true", "phi_true"):
        if key in doc:
            kw[key] = c.point(doc[key], [key])
    if "context_counts" in doc:
        kw["context_counts"] = dict(doc["context_counts"])
    if c.errors:
        raise ValidationError(c.errors)
    try:
        if "builtin" in doc:
            name = doc["builtin"]
            if name not in BUILTIN_PLANS:
                raise ValidationError([f"$.builtin: unknown plan {name!r}; choose from {sorted(BUILTIN_PLANS)}"])
            base = BUILTIN_PLANS[name](**({"grid_denominator": doc["grid_denominator"]} if "grid_denominator" in doc else {}))
            if mode == "float":
                raise ValidationError(["$.builtin: built-in plans are exact; float mode is not supported"])
            return replace(base, **kw)
        if "grid_denominator" in doc:
            raise ValidationError(["$.grid_denominator: only meaningful with 'builtin'"])
        missing = [k for k in ("theta_true", "phi_true", "n_units", "n_replications") if k not in doc]
        if missing:
            raise ValidationError([f"$: missing required key(s) {missing} for a unit_model plan"])
        try:
            unit = validate(doc["unit_model"], mode)
        except ValidationError as exc:
            raise ValidationError([e.replace("$", "$.unit_model", 1) for e in exc.errors]) from None
        if unit.data_model is None or unit.missingness_model is None:
            raise ValidationError(["$.unit_model: needs data_model and missingness_model"])
        return SimulationPlan(unit.data_model, unit.missingness_model, covariate=unit.conditioning, **kw)
    except UsageError as exc:
        raise ValidationError([f"$: {exc}"]) from None


def load_plan(path: str | Path, mode: str | None = None):
    return validate_plan(read_document(path), mode)


__all__ = [
    "SCHEMA", "PLAN_SCHEMA", "validate", "load", "read_document", "to_document", "dump",
    "is_exact_bundle", "validate_prior", "load_prior", "validate_plan", "load_plan",
]
