"""Decide which missing-at-random conditions a mechanism satisfies.

Each check enumerates the quantifiers literally over the finite phi grid,
pattern set and data space.  A failing check returns the first violating
``(phi, m, y, y*)`` in enumeration order as its witness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable

from .errors import StructuralError, UsageError
from .model import (
    ConditioningFunction,
    MissingnessModel,
    Pattern,
    Realisation,
    as_point,
    compatible_indices,
)
from .numeric import EQ_TOL, Number, close

DEFINITION_NAMES = {
    "realised_mar": "realised MAR",
    "everywhere_mar": "everywhere MAR",
    "everywhere_mar_iid": "everywhere MAR (i.i.d. units)",
    "realised_mcar": "realised MCAR",
    "everywhere_mcar": "everywhere MCAR",
    "covariate_dependent_mcar": "covariate-dependent MCAR",
}


@dataclass(frozen=True)
class Witness:
    """A violating tuple: g_phi(m | y) != g_phi(m | y_star)."""

    phi: tuple
    m: Pattern
    y: tuple
    y_star: tuple
    g_y: Number
    g_y_star: Number


@dataclass(frozen=True)
class Verdict:
    holds: bool
    witness: Witness | None = None

    def __bool__(self):
        return self.holds


def _first_violation(mm: MissingnessModel, phi, m: Pattern, indices: Iterable[int], tol: float):
    """Compare every g_phi(m | y) over ``indices`` with the first one."""
    col = mm.column(phi, m)
    indices = list(indices)
    if not indices:
        return None
    ref = indices[0]
    for i in indices[1:]:
        if not close(col[ref], col[i], tol):
            return Witness(
                phi, m, mm.space.points[ref], mm.space.points[i], col[ref], col[i]
            )
    return None


def _observed_groups(mm: MissingnessModel, m: Pattern) -> list[list[int]]:
    """Partition of the space into classes with equal o(y, m), in first-seen order."""
    pos = m.observed_positions
    groups: dict[tuple, list[int]] = {}
    for i, y in enumerate(mm.space.points):
        groups.setdefault(tuple(y[j] for j in pos), []).append(i)
    return list(groups.values())


def _check_real(mm: MissingnessModel, real: Realisation):
    if len(real.m_tilde) != mm.space.n_coords:
        raise StructuralError("realised pattern length does not match the data space")
    mm.space.index(real.y_tilde)


def classify_realised_mar(mm: MissingnessModel, real: Realisation, tol: float = EQ_TOL) -> Verdict:
    _check_real(mm, real)
    idx = compatible_indices(mm.space, real.record)
    for phi in mm.phi_grid:
        w = _first_violation(mm, phi, real.m_tilde, idx, tol)
        if w is not None:
            return Verdict(False, w)
    return Verdict(True)


def mar_at_point(mm: MissingnessModel, real: Realisation, phi0, tol: float = EQ_TOL) -> Verdict:
    """Non-standard advisory check: the realised-MAR equality at one designated phi only.

    This is the "true mechanism" reading where equality is required at the
    true parameter value alone.  It is not one of the standard definitions.
    """
    _check_real(mm, real)
    phi0 = as_point(phi0)
    if phi0 not in mm.kernels:
        raise UsageError(f"phi0={phi0!r} is not on the grid")
    w = _first_violation(mm, phi0, real.m_tilde, compatible_indices(mm.space, real.record), tol)
    return Verdict(w is None, w)


def classify_everywhere_mar(mm: MissingnessModel, tol: float = EQ_TOL) -> Verdict:
    for phi in mm.phi_grid:
        for m in mm.patterns(phi):
            for group in _observed_groups(mm, m):
                w = _first_violation(mm, phi, m, group, tol)
                if w is not None:
                    return Verdict(False, w)
    return Verdict(True)


def classify_everywhere_mar_iid(mm: MissingnessModel, tol: float = EQ_TOL) -> Verdict:
    """Per-unit everywhere MAR on the unit kernel g_{phi,1}.

    The witness (if any) is expressed in the unit space.
    """
    if mm.iid is None:
        raise UsageError("the i.i.d. everywhere-MAR check needs a per-unit kernel")
    return classify_everywhere_mar(mm.unit_model(), tol)


def classify_realised_mcar(mm: MissingnessModel, real: Realisation, tol: float = EQ_TOL) -> Verdict:
    _check_real(mm, real)
    everything = range(mm.space.size)
    for phi in mm.phi_grid:
        w = _first_violation(mm, phi, real.m_tilde, everything, tol)
        if w is not None:
            return Verdict(False, w)
    return Verdict(True)


def classify_everywhere_mcar(mm: MissingnessModel, tol: float = EQ_TOL) -> Verdict:
    everything = range(mm.space.size)
    for phi in mm.phi_grid:
        for m in mm.patterns(phi):
            w = _first_violation(mm, phi, m, everything, tol)
            if w is not None:
                return Verdict(False, w)
    return Verdict(True)


def classify_covariate_dependent_mcar(
    mm: MissingnessModel,
    real: Realisation,
    cond: ConditioningFunction,
    tol: float = EQ_TOL,
    everywhere: bool = False,
) -> Verdict:
    """g_phi(m~ | y) constant over the fibre b(y) = x~, for every phi.

    With ``everywhere=True`` the constancy is required for every pattern
    and within every fibre of b.
    """
    _check_real(mm, real)
    if cond.space != mm.space:
        raise StructuralError("conditioning function is defined on a different space")
    for phi in mm.phi_grid:
        if everywhere:
            for m in mm.patterns(phi):
                for x in cond.levels:
                    w = _first_violation(mm, phi, m, cond.fiber(x), tol)
                    if w is not None:
                        return Verdict(False, w)
        else:
            w = _first_violation(mm, phi, real.m_tilde, cond.fiber(), tol)
            if w is not None:
                return Verdict(False, w)
    return Verdict(True)


@dataclass(frozen=True)
class MechanismClassification:
    realised_mar: Verdict
    everywhere_mar: Verdict
    realised_mcar: Verdict
    everywhere_mcar: Verdict
    everywhere_mar_iid: Verdict | None = None
    covariate_dependent_mcar: Verdict | None = None
    covariate_dependent_mcar_everywhere: Verdict | None = None
    lattice: dict[str, bool] = field(default_factory=dict)

    @property
    def lattice_consistent(self) -> bool:
        return all(self.lattice.values())

    def verdicts(self) -> dict[str, Verdict | None]:
        return {
            "realised_mar": self.realised_mar,
            "everywhere_mar": self.everywhere_mar,
            "everywhere_mar_iid": self.everywhere_mar_iid,
            "realised_mcar": self.realised_mcar,
            "everywhere_mcar": self.everywhere_mcar,
            "covariate_dependent_mcar": self.covariate_dependent_mcar,
        }


def _implies(a: Verdict, b: Verdict) -> bool:
    return (not a.holds) or b.holds


def lattice_flags(rmar: Verdict, emar: Verdict, rmcar: Verdict, emcar: Verdict) -> dict[str, bool]:
    return {
        "everywhere_mcar=>realised_mcar": _implies(emcar, rmcar),
        "realised_mcar=>realised_mar": _implies(rmcar, rmar),
        "everywhere_mcar=>everywhere_mar": _implies(emcar, emar),
        "everywhere_mar=>realised_mar": _implies(emar, rmar),
    }


def classify(
    mm: MissingnessModel,
    real: Realisation,
    cond: ConditioningFunction | None = None,
    tol: float = EQ_TOL,
) -> MechanismClassification:
    """Run every applicable check and record the implication-lattice flags."""
    rmar = classify_realised_mar(mm, real, tol)
    emar = classify_everywhere_mar(mm, tol)
    rmcar = classify_realised_mcar(mm, real, tol)
    emcar = classify_everywhere_mcar(mm, tol)
    iid = classify_everywhere_mar_iid(mm, tol) if mm.iid is not None else None
    cdm = cdm_e = None
    if cond is not None:
        cdm = classify_covariate_dependent_mcar(mm, real, cond, tol)
        cdm_e = classify_covariate_dependent_mcar(mm, real, cond, tol, everywhere=True)
    lattice = lattice_flags(rmar, emar, rmcar, emcar)
    if iid is not None:
        lattice["everywhere_mar<=>everywhere_mar_iid"] = iid.holds == emar.holds
    return MechanismClassification(rmar, emar, rmcar, emcar, iid, cdm, cdm_e, lattice)


def witness_is_valid(mm: MissingnessModel, w: Witness, tol: float = EQ_TOL) -> bool:
    """Re-evaluate a witness against the model: the inequality must reproduce."""
    a = mm.g(w.phi, w.m, w.y)
    b = mm.g(w.phi, w.m, w.y_star)
    return a == w.g_y and b == w.g_y_star and not close(a, b, tol)


def verdict_row(name: str, verdict: Verdict | None) -> dict[str, Any]:
    if verdict is None:
        return {"definition": DEFINITION_NAMES[name], "verdict": "n/a"}
    return {"definition": DEFINITION_NAMES[name], "verdict": "yes" if verdict.holds else "no"}
