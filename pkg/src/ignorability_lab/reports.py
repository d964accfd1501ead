"""Report encoding (JSON round trip), rendering and run manifests.

The JSON codec is tagged so that every report decodes back to an equal
object: Fractions become ``{"fraction": "p/q"}``, tuples
``{"tuple": [...]}``, dicts with non-string keys ``{"items": [[k, v], ...]}``
and dataclasses ``{"type": name, "fields": {...}}``.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from . import __version__
from .classify import DEFINITION_NAMES, MechanismClassification, Witness
from .errors import UsageError
from .likelihood import GridFunction, Theorem1Report
from .model import point_label
from .sampling import Theorem3Report
from .numeric import format_number

FORMATS = ("text", "csv", "json")

_REGISTRY: dict[str, type] = {}


def register(cls):
    _REGISTRY[cls.__name__] = cls
    return cls


def _register_defaults():
    from . import bayes, classify, likelihood, model, necessity, sampling, simulate

    for cls in (
        model.Pattern, classify.Witness, classify.Verdict, classify.MechanismClassification,
        likelihood.GridFunction, likelihood.Theorem1Report, bayes.Posterior, bayes.Theorem2Report,
        sampling.SamplingDistribution, sampling.Theorem3Cell, sampling.Theorem3Report,
        necessity.CompletenessReport, necessity.AppendixReport, simulate.SimulationReport,
        simulate.ExactSamplingReport, simulate.BayesFrequencyReport,
    ):
        register(cls)


_DEFAULTS_LOADED = False


def _load_defaults():
    global _DEFAULTS_LOADED
    _DEFAULTS_LOADED = True
    _register_defaults()


# --------------------------------------------------------------------------
# codec
# --------------------------------------------------------------------------


def encode(obj: Any) -> Any:
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, float):
        if math.isfinite(obj):
            return obj
        return {"float": repr(obj)}
    if isinstance(obj, Fraction):
        return {"fraction": f"{obj.numerator}/{obj.denominator}"}
    if isinstance(obj, tuple):
        return {"tuple": [encode(v) for v in obj]}
    if isinstance(obj, list):
        return [encode(v) for v in obj]
    if isinstance(obj, dict):
        if all(isinstance(k, str) for k in obj):
            return {"dict": {k: encode(v) for k, v in obj.items()}}
        return {"items": [[encode(k), encode(v)] for k, v in obj.items()]}
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        name = type(obj).__name__
        if name not in _REGISTRY:
            register(type(obj))
        fields = {f.name: encode(getattr(obj, f.name)) for f in dataclasses.fields(obj) if f.init}
        return {"type": name, "fields": fields}
    if hasattr(obj, "item"):  # numpy scalar
        return encode(obj.item())
    raise TypeError(f"cannot encode {type(obj).__name__}")


def decode(data: Any) -> Any:
    if not _DEFAULTS_LOADED:
        _load_defaults()
    if data is None or isinstance(data, (bool, str, int, float)):
        return data
    if isinstance(data, list):
        return [decode(v) for v in data]
    if isinstance(data, dict):
        if "fraction" in data:
            return Fraction(data["fraction"])
        if "float" in data:
            return float(data["float"])
        if "tuple" in data:
            return tuple(decode(v) for v in data["tuple"])
        if "dict" in data:
            return {k: decode(v) for k, v in data["dict"].items()}
        if "items" in data:
            return {decode(k): decode(v) for k, v in data["items"]}
        if "type" in data:
            cls = _REGISTRY.get(data["type"])
            if cls is None:
                raise UsageError(f"unknown report type {data['type']!r}")
            return cls(**{k: decode(v) for k, v in data["fields"].items()})
    raise UsageError(f"cannot decode {data!r}")


# --------------------------------------------------------------------------
# CLI report wrappers
# --------------------------------------------------------------------------


@dataclass
class LikelihoodReport:
    """One likelihood object on its grid, with a cutoff point set when asked."""

    object: str
    phi: tuple | None
    conditional: bool
    values: dict  # grid point -> value
    cutoff: Any = None
    interval: list | None = None

    def table_rows(self):
        header = ["point", "value"] + (["in_interval"] if self.interval is not None else [])
        inside = set(self.interval or [])
        rows = []
        for p, v in self.values.items():
            row = [p, v]
            if self.interval is not None:
                row.append(p in inside)
            rows.append(row)
        return header, rows


@dataclass
class BayesReport:
    """theta posteriors from the joint and the ignoring route, plus the comparison."""

    theorem: Any  # bayes.Theorem2Report

    def table_rows(self):
        t = self.theorem
        rows = [[p, t.joint_marginal.get(p, 0), t.ignoring.get(p, 0)] for p in t.joint_marginal]
        return ["theta", "joint_marginal", "ignoring"], rows

    def notes(self):
        return [f"TV distance: {_cell(self.theorem.tv)}"]


@dataclass
class SamplingReport:
    """Correct and potentially incorrect laws of a statistic at each (theta, phi)."""

    statistic: str
    pattern: str
    conditional: bool
    rows: list  # (theta, phi, outcome, correct, potentially_incorrect)
    theorem: Any  # sampling.Theorem3Report

    def table_rows(self):
        return ["theta", "phi", "outcome", "correct", "potentially_incorrect"], [list(r) for r in self.rows]


@dataclass
class SearchSummary:
    target: str
    searched: int
    exhaustive_searched: int
    random_searched: int
    exhaustive_complete: bool
    eligible: int
    n_hits: int
    certified_empty: bool
    seed: int | None
    instances: list  # [{"file", "index", "description", "verdicts"}]

    def table_rows(self):
        rows = [[k, getattr(self, k)] for k in (
            "target", "searched", "exhaustive_searched", "random_searched", "exhaustive_complete",
            "eligible", "n_hits", "certified_empty", "seed")]
        for inst in self.instances:
            rows.append([f"instance {inst['index']}", f"{inst['file']}: {inst['description']}"])
        return ["field", "value"], rows


@dataclass
class SimulateOutput:
    simulation: Any  # simulate.SimulationReport
    exact: Any = None  # simulate.ExactSamplingReport
    bayes: Any = None  # simulate.BayesFrequencyReport

    def table_rows(self):
        rows = []
        for section in ("simulation", "exact", "bayes"):
            rep = getattr(self, section)
            if rep is not None:
                rows.extend([section] + r for r in _field_rows(rep, ""))
        return ["section", "field", "value"], rows


for _cls in (LikelihoodReport, BayesReport, SamplingReport, SearchSummary, SimulateOutput):
    register(_cls)


# --------------------------------------------------------------------------
# manifest
# --------------------------------------------------------------------------


@dataclass
class RunManifest:
    """What produced a report.  Timestamps are only recorded on request."""

    tool_version: str
    input_sha256: str | None
    subcommand: str
    flags: dict
    seed: int | None
    mode: str | None
    timestamps: dict = field(default_factory=dict)


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def make_manifest(subcommand: str, flags: dict, input_bytes: bytes | None, seed=None, mode=None,
                  timestamps: dict | None = None) -> RunManifest:
    return RunManifest(
        tool_version=__version__,
        input_sha256=sha256_bytes(input_bytes) if input_bytes is not None else None,
        subcommand=subcommand,
        flags={k: flags[k] for k in sorted(flags)},
        seed=seed,
        mode=mode,
        timestamps=timestamps or {},
    )


register(RunManifest)


def to_json(report: Any, manifest: RunManifest | None = None) -> str:
    doc = {"manifest": encode(manifest), "report": encode(report)}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def from_json(text: str) -> tuple[Any, RunManifest | None]:
    doc = json.loads(text)
    return decode(doc["report"]), decode(doc["manifest"])


# --------------------------------------------------------------------------
# tables
# --------------------------------------------------------------------------


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return str(format_number(v))
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple) and all(not isinstance(x, (tuple, list)) for x in v):
        return point_label(v)
    if isinstance(v, (tuple, list)):
        return "[" + "; ".join(_cell(x) for x in v) + "]"
    return str(v)


def _witness_text(w: Witness | None) -> str:
    if w is None:
        return ""
    return (
        f"phi={point_label(w.phi)}, m={w.m}: g(m|{point_label(w.y)})={_cell(w.g_y)} "
        f"vs g(m|{point_label(w.y_star)})={_cell(w.g_y_star)}"
    )


def _field_rows(obj, prefix: str) -> list:
    rows = []
    for f in dataclasses.fields(obj):
        v = getattr(obj, f.name)
        name = prefix + f.name
        if isinstance(v, dict):
            for k, x in v.items():
                rows.append([f"{name}[{_cell(k)}]", x])
        elif dataclasses.is_dataclass(v) and not isinstance(v, type):
            rows.extend(_field_rows(v, name + "."))
        else:
            rows.append([name, v])
    return rows


def table_rows(report: Any) -> tuple[list[str], list[list]]:
    """Header and rows for the tabular (text and CSV) forms of a report."""
    if isinstance(report, MechanismClassification):
        header = ["definition", "holds", "witness"]
        rows = []
        for key, verdict in report.verdicts().items():
            if verdict is None:
                rows.append([DEFINITION_NAMES[key], "n/a", ""])
            else:
                rows.append([DEFINITION_NAMES[key], verdict.holds, _witness_text(verdict.witness)])
        return header, rows
    if isinstance(report, Theorem1Report):
        header = ["phi", "proportional", "constant"]
        rows = [[p, ok, report.constants.get(p)] for p, ok in report.proportional_fixed_phi.items()]
        return header, rows
    if isinstance(report, Theorem3Report):
        header = ["theta", "phi", "tv"]
        rows = [[c.theta, c.phi, "n/a (positivity fails)" if c.tv is None else c.tv] for c in report.cells]
        return header, rows
    if isinstance(report, GridFunction):
        return ["point", "value"], [[p, v] for p, v in report.items()]
    if hasattr(report, "table_rows"):
        return report.table_rows()
    if dataclasses.is_dataclass(report):
        return ["field", "value"], _field_rows(report, "")
    raise UsageError(f"cannot tabulate {type(report).__name__}")


def to_csv(report: Any) -> str:
    header, rows = table_rows(report)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def to_text(report: Any, title: str | None = None) -> str:
    header, rows = table_rows(report)
    cells = [header] + [[_cell(v) for v in r] for r in rows]
    widths = [max(len(r[j]) for r in cells) for j in range(len(header))]
    lines = []
    if title:
        lines.append(title)
    lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
    lines.append("  ".join("-" * w for w in widths))
    for r in cells[1:]:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    notes = getattr(report, "notes", None)
    if callable(notes):
        lines.extend(notes())
    elif isinstance(report, Theorem3Report):
        label = "fibre-wise condition" if report.conditional else "realised MCAR"
        lines.append(f"{label}: {_cell(report.condition_holds)}")
    return "\n".join(lines) + "\n"


def render(report: Any, fmt: str, manifest: RunManifest | None = None, title: str | None = None) -> str:
    if fmt == "json":
        return to_json(report, manifest)
    if fmt == "csv":
        return to_csv(report)
    if fmt == "text":
        return to_text(report, title)
    raise UsageError(f"unknown format {fmt!r}; choose from {', '.join(FORMATS)}")


__all__ = [
    "FORMATS", "RunManifest", "encode", "decode", "render", "to_json", "from_json",
    "to_csv", "to_text", "table_rows", "make_manifest", "register", "LikelihoodReport",
    "BayesReport", "SamplingReport", "SearchSummary", "SimulateOutput",
]
