"""Command-line entry point: ``ignorability-lab <subcommand> [flags]``.

Exit codes: 0 success, 2 invalid input or usage, 3 resource cap hit,
4 a theorem check failed under its hypotheses.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, reports, specfile
from .errors import (
    DomainError,
    LabError,
    PreconditionError,
    ResourceError,
    StructuralError,
    TheoremViolation,
    UsageError,
    ValidationError,
)
from .numeric import parse_number

CACHE_ENV = "IGNORABILITY_LAB_CACHE"
SUBCOMMANDS = ("classify", "likelihood", "bayes", "sampling", "simulate", "completeness", "search", "verify")


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--input", help="model spec file (JSON)")
    p.add_argument("--example", help="use a built-in example instead of --input")
    p.add_argument("--mode", choices=("rational", "float"), help="arithmetic mode (default: as written)")
    p.add_argument("--tol", type=float, help="float tolerance (default: per check)")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=reports.FORMATS, help="output format (default: text)")
    p.add_argument("--threads", type=int, default=1, help="worker count")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--record-time", action="store_true", help="add wall-clock timestamps to the manifest")
    return p


def build_parser() -> argparse.ArgumentParser:
    from .search import TARGET_HELP
    from .simulate import BUILTIN_PLANS

    common = _common()
    parser = argparse.ArgumentParser(
        prog="ignorability-lab", description="Exact checks of ignorability conditions on finite models."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("classify", parents=[common], help="verdicts for every missingness definition")

    p = sub.add_parser("likelihood", parents=[common], help="evaluate a likelihood object on its grid")
    p.add_argument("--object", default="l2", choices=("l1", "l2", "l3", "l4", "l5", "profile"))
    p.add_argument("--phi", help="phi label for l3, e.g. 1/2 or 4/5,3/10")
    p.add_argument("--conditional", action="store_true", help="condition on the covariate in the input model")
    p.add_argument("--cutoff", help="also list grid points with normalised likelihood above r")

    p = sub.add_parser("bayes", parents=[common], help="joint versus ignoring posterior for theta")
    p.add_argument("--prior", help="prior file (default: prior in the input model, else uniform)")

    p = sub.add_parser("sampling", parents=[common], help="sampling distributions given the pattern")
    p.add_argument("--statistic", default="identity", help="built-in name or a JSON table file")
    p.add_argument("--conditional", action="store_true", help="also condition on the covariate level")

    p = sub.add_parser("simulate", parents=[common], help="repeated-sampling experiment")
    p.add_argument("--plan", required=True, help=f"plan file or built-in name ({', '.join(BUILTIN_PLANS)})")
    p.add_argument("--reps", type=int, help="override the number of replications")
    p.add_argument("--exact-units", type=int, help="also enumerate the exact law at this many units")
    p.add_argument("--prior", help="prior file; adds the frequentist check of Bayesian inference")

    p = sub.add_parser("completeness", parents=[common], help="grid-completeness of f(y_mis | y_obs; theta)")
    p.add_argument("--pattern", help="pattern (default: realised)")
    p.add_argument("--observed", help="comma-separated observed values (default: realised)")

    p = sub.add_parser("search", parents=[common], help="search small rational models for a target",
                       epilog="targets: " + "; ".join(f"{k}: {v}" for k, v in TARGET_HELP.items()))
    p.add_argument("--target", required=True, choices=tuple(TARGET_HELP))
    p.add_argument("--budget", type=int, help="candidate budget (default: exhaustive phase only)")
    p.add_argument("--max-hits", type=int, default=10)

    p = sub.add_parser("verify", parents=[common], help="check a theorem's conclusions on the input")
    p.add_argument("--theorem", required=True, choices=("1", "2", "3", "appendix"))
    p.add_argument("--prior", help="prior file for theorem 2")
    p.add_argument("--statistic", default="identity", help="statistic for theorem 3")
    p.add_argument("--conditional", action="store_true", help="conditional variant (theorems 1 and 3)")
    return parser


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------


def _load_input(args):
    """(bundle, canonical bytes for the manifest digest)."""
    from .catalog import EXAMPLES

    if args.input and args.example:
        raise UsageError("give --input or --example, not both")
    if args.example:
        if args.example not in EXAMPLES:
            raise UsageError(f"unknown example {args.example!r}; choose from {', '.join(EXAMPLES)}")
        doc = specfile.to_document(EXAMPLES[args.example]())
        data = json.dumps(doc, sort_keys=True).encode()
    elif args.input:
        path = Path(args.input)
        if not path.is_file():
            raise UsageError(f"cannot read input file {args.input}")
        data = path.read_bytes()
        doc = specfile.read_document(path)
    else:
        raise UsageError("an input model is required (--input FILE or --example NAME)")
    return specfile.validate(doc, args.mode), data


def _tol(args, default):
    return default if args.tol is None else args.tol


def _parse_point(text: str) -> tuple:
    try:
        return tuple(parse_number(v.strip()) for v in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse {text!r} as a parameter value") from None


def _match_point(grid, text: str, what: str):
    target = _parse_point(text)
    for p in grid:
        if len(p) == len(target) and all(float(a) == float(b) for a, b in zip(p, target)):
            return p
    raise UsageError(f"{what} {text} is not on the grid")


def _prior(args, bundle):
    from .bayes import Prior

    if getattr(args, "prior", None):
        return specfile.load_prior(args.prior, bundle.data_model, bundle.missingness_model, args.mode)
    if bundle.prior is not None:
        return bundle.prior
    exact = specfile.is_exact_bundle(bundle) and args.mode != "float"
    return Prior.uniform(bundle.data_model.theta_grid, bundle.missingness_model.phi_grid, exact=exact)


def _statistic(name: str):
    from .model import Pattern
    from .sampling import Statistic, get_statistic

    path = Path(name)
    if not path.is_file():
        return get_statistic(name)
    doc = specfile.read_document(path)
    try:
        table = {(str(Pattern.parse(r["m"])), tuple(r["o"])): _hashable(r["label"]) for r in doc["table"]}
    except (KeyError, TypeError, ValueError):
        raise ValidationError([f"{name}: expected {{'table': [{{'m', 'o', 'label'}}, ...]}}"]) from None
    return Statistic.from_table(doc.get("name", path.stem), table)


def _hashable(v):
    return tuple(v) if isinstance(v, list) else v


def _mode_of(args, bundle) -> str:
    if args.mode:
        return args.mode
    return "rational" if bundle is None or specfile.is_exact_bundle(bundle) else "float"


def _flags(args, skip=("threads", "out", "format", "record_time", "command", "input", "seed", "mode")) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None and v is not False}


def _manifest(args, data: bytes | None, mode: str, seed=None, started=None):
    stamps = {}
    if args.record_time:
        stamps = {"started": started, "finished": datetime.now(timezone.utc).isoformat()}
    return reports.make_manifest(args.command, _flags(args), data, seed=seed, mode=mode, timestamps=stamps)


def _format(args, default="text") -> str:
    if args.format:
        return args.format
    if args.out:
        suffix = Path(args.out).suffix.lower().lstrip(".")
        if suffix in ("csv", "json"):
            return suffix
    return default


def _emit(args, report, manifest, title=None, default_format="text"):
    text = reports.render(report, _format(args, default_format), manifest, title)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _require(bundle, *parts):
    missing = [p for p in parts if getattr(bundle, p) is None]
    if missing:
        raise PreconditionError(f"the input model lacks: {', '.join(missing)}")


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_classify(args, started):
    from .classify import classify
    from .numeric import EQ_TOL

    bundle, data = _load_input(args)
    _require(bundle, "missingness_model", "realisation")
    report = classify(bundle.missingness_model, bundle.realisation, bundle.conditioning, _tol(args, EQ_TOL))
    _emit(args, report, _manifest(args, data, _mode_of(args, bundle), started=started))
    return 0


def _conditional_likelihood(name, dm, mm, js, real, cond, phi):
    from . import likelihood as lk

    if name == "l1":
        return lk.joint_likelihood_given_x(dm, mm, js, real, cond)
    if name == "l2":
        return lk.ignoring_likelihood_given_x(dm, real, cond)
    if name == "l3":
        if phi is None:
            raise UsageError("the fixed-phi likelihood needs --phi")
        return lk.fixed_phi_likelihood_given_x(dm, mm, js, real, phi, cond)
    if name in ("l4", "profile"):
        return lk.profile_likelihood_given_x(dm, mm, js, real, cond)
    return lk.l5(mm, real)


def cmd_likelihood(args, started):
    from .likelihood import likelihood_interval, likelihood_object

    bundle, data = _load_input(args)
    needs = ["data_model", "realisation"] if args.object == "l2" else ["data_model", "missingness_model", "realisation"]
    if args.object == "l5":
        needs = ["missingness_model", "realisation"]
    _require(bundle, *needs)
    dm, mm, js, real = bundle.data_model, bundle.missingness_model, bundle.joint_space, bundle.realisation
    phi = _match_point(mm.phi_grid, args.phi, "phi") if args.phi else None
    if args.conditional:
        _require(bundle, "conditioning")
        gf = _conditional_likelihood(args.object, dm, mm, js, real, bundle.conditioning, phi)
    else:
        gf = likelihood_object(args.object, dm, mm, js, real, phi)
    cutoff = interval = None
    if args.cutoff is not None:
        cutoff = parse_number(args.cutoff)
        interval = likelihood_interval(gf, cutoff)
    report = reports.LikelihoodReport(args.object, phi, args.conditional, dict(gf.items()), cutoff, interval)
    _emit(args, report, _manifest(args, data, _mode_of(args, bundle), started=started))
    return 0


def cmd_bayes(args, started):
    from .bayes import verify_theorem2
    from .numeric import EQ_TOL

    bundle, data = _load_input(args)
    _require(bundle, "data_model", "missingness_model", "realisation")
    prior = _prior(args, bundle)
    rep = verify_theorem2(bundle.data_model, bundle.missingness_model, bundle.joint_space,
                          bundle.realisation, prior, _tol(args, EQ_TOL), strict=False)
    _emit(args, reports.BayesReport(rep), _manifest(args, data, _mode_of(args, bundle), started=started))
    return 0


def cmd_sampling(args, started):
    from . import sampling as sm
    from .numeric import EQ_TOL

    bundle, data = _load_input(args)
    _require(bundle, "data_model", "missingness_model", "realisation")
    dm, mm, real = bundle.data_model, bundle.missingness_model, bundle.realisation
    t = _statistic(args.statistic)
    tol = _tol(args, EQ_TOL)
    rows = []
    if args.conditional:
        _require(bundle, "conditioning")
        cond = bundle.conditioning
        sm.check_sampling_applicability(dm, real, cond, t)
        theorem = sm.verify_theorem3_given_x(dm, mm, real, t, cond, tol=tol, strict=False)
    else:
        theorem = sm.verify_theorem3(dm, mm, real, t, tol=tol, strict=False)
    for cell in theorem.cells:
        if cell.tv is None:
            continue
        if args.conditional:
            cor = sm.correct_conditional_dist_given_x(dm, mm, cell.theta, cell.phi, real, t, cond)
            inc = sm.potentially_incorrect_dist_given_x(dm, cell.theta, real, t, cond)
        else:
            cor = sm.correct_conditional_dist(dm, mm, cell.theta, cell.phi, real.m_tilde, t)
            inc = sm.potentially_incorrect_dist(dm, cell.theta, real.m_tilde, t)
        labels = list(cor.outcomes) + [k for k in inc.outcomes if k not in cor.outcomes]
        for lab in labels:
            rows.append((cell.theta, cell.phi, lab, cor[lab], inc[lab]))
    report = reports.SamplingReport(t.name, str(real.m_tilde), args.conditional, rows, theorem)
    _emit(args, report, _manifest(args, data, _mode_of(args, bundle), started=started))
    return 0


def _load_plan(args):
    from .simulate import BUILTIN_PLANS

    if args.plan in BUILTIN_PLANS:
        doc = {"builtin": args.plan}
        data = json.dumps(doc, sort_keys=True).encode()
    else:
        path = Path(args.plan)
        if not path.is_file():
            raise UsageError(f"{args.plan!r} is neither a plan file nor a built-in plan ({', '.join(BUILTIN_PLANS)})")
        data = path.read_bytes()
        doc = specfile.read_document(path)
    plan = specfile.validate_plan(doc, args.mode)
    if args.seed is not None:
        plan = replace(plan, seed=args.seed)
    if args.reps is not None:
        plan = replace(plan, n_replications=args.reps)
    return plan, data


def _cache_path(key: str) -> Path | None:
    root = os.environ.get(CACHE_ENV)
    if not root:
        return None
    Path(root).mkdir(parents=True, exist_ok=True)
    return Path(root) / f"{hashlib.sha256(key.encode()).hexdigest()}.json"


def _exact_cached(plan, n_units: int, plan_digest: str):
    from .simulate import exact_repeated_sampling

    path = _cache_path(f"exact|{__version__}|{plan_digest}|{n_units}")
    if path is not None and path.is_file():
        return reports.decode(json.loads(path.read_text()))
    rep = exact_repeated_sampling(plan.dm, plan.mm, plan.theta_true, plan.phi_true, n_units)
    if path is not None:
        path.write_text(json.dumps(reports.encode(rep), sort_keys=True))
    return rep


def cmd_simulate(args, started):
    from .simulate import frequentist_bayes_properties, is_exact_plan, run_simulation

    plan, data = _load_plan(args)
    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    sim = run_simulation(plan, threads=args.threads, strict=True)
    exact = bayes = None
    if args.exact_units is not None:
        exact = _exact_cached(plan, args.exact_units, reports.sha256_bytes(data))
    if args.prior:
        from .model import ModelBundle

        stub = ModelBundle(plan.dm.space, plan.dm, plan.mm)
        prior = specfile.load_prior(args.prior, stub.data_model, stub.missingness_model, args.mode)
        bayes = frequentist_bayes_properties(plan, prior, threads=args.threads, strict=True)
    mode = args.mode or ("rational" if is_exact_plan(plan) else "float")
    manifest = _manifest(args, data, mode, seed=plan.seed, started=started)
    report = reports.SimulateOutput(sim, exact, bayes)
    fmt = _format(args, "json")
    if args.out:
        out = Path(args.out)
        out.write_text(reports.render(report, fmt, manifest))
        if fmt != "json":
            out.with_suffix(".json").write_text(reports.render(report, "json", manifest))
    else:
        sys.stdout.write(reports.render(report, fmt, manifest))
    return 0


def cmd_completeness(args, started):
    from .necessity import check_grid_completeness, factorize_by_pattern

    bundle, data = _load_input(args)
    _require(bundle, "data_model")
    if args.pattern is None or args.observed is None:
        _require(bundle, "realisation")
    m = args.pattern or str(bundle.realisation.m_tilde)
    if args.observed is not None:
        obs = tuple(parse_number(v) if "/" in v or "." in v else int(v) for v in args.observed.split(",") if v)
    else:
        obs = tuple(bundle.realisation.record.observed_values)
    report = check_grid_completeness(factorize_by_pattern(bundle.data_model, m), obs)
    _emit(args, report, _manifest(args, data, _mode_of(args, bundle), started=started))
    return 0


def cmd_search(args, started):
    from .search import search_counterexamples

    seed = 0 if args.seed is None else args.seed
    result = search_counterexamples(args.target, budget=args.budget, seed=seed, max_hits=args.max_hits,
                                    workers=args.threads)
    out_dir = Path(args.out) if args.out else Path(f"search-{args.target}")
    out_dir.mkdir(parents=True, exist_ok=True)
    instances = []
    for inst in result.instances:
        name = f"instance-{inst.index:06d}.json"
        specfile.dump(inst.bundle, out_dir / name, inst.description)
        instances.append({"file": name, "index": inst.index, "description": inst.description,
                          "verdicts": inst.verdicts})
    summary = reports.SearchSummary(
        result.target, result.searched, result.exhaustive_searched, result.random_searched,
        result.exhaustive_complete, result.eligible, result.n_hits, result.certified_empty,
        result.seed, instances,
    )
    manifest = _manifest(args, None, "rational", seed=seed, started=started)
    (out_dir / "summary.json").write_text(reports.to_json(summary, manifest))
    sys.stdout.write(reports.render(summary, _format(args), manifest))
    return 0


def cmd_verify(args, started):
    from .numeric import EQ_TOL, PROP_TOL

    bundle, data = _load_input(args)
    _require(bundle, "data_model", "missingness_model", "realisation")
    dm, mm, js, real = bundle.data_model, bundle.missingness_model, bundle.joint_space, bundle.realisation
    if args.theorem == "1":
        from .likelihood import verify_theorem1, verify_theorem1_given_x

        tol = _tol(args, PROP_TOL)
        if args.conditional:
            _require(bundle, "conditioning")
            report = verify_theorem1_given_x(dm, mm, js, real, bundle.conditioning, tol)
        else:
            report = verify_theorem1(dm, mm, js, real, tol, strict=True)
    elif args.theorem == "2":
        from .bayes import verify_theorem2

        report = verify_theorem2(dm, mm, js, real, _prior(args, bundle), _tol(args, EQ_TOL), strict=True)
    elif args.theorem == "3":
        from .sampling import verify_theorem3, verify_theorem3_given_x

        t = _statistic(args.statistic)
        if args.conditional:
            _require(bundle, "conditioning")
            report = verify_theorem3_given_x(dm, mm, real, t, bundle.conditioning, tol=_tol(args, EQ_TOL))
        else:
            report = verify_theorem3(dm, mm, real, t, tol=_tol(args, EQ_TOL), strict=True)
    else:
        from .necessity import verify_appendix_theorem

        report = verify_appendix_theorem(dm, mm, js, real, _tol(args, PROP_TOL), strict=True)
    _emit(args, report, _manifest(args, data, _mode_of(args, bundle), started=started), default_format="json")
    return 0


COMMANDS = {
    "classify": cmd_classify,
    "likelihood": cmd_likelihood,
    "bayes": cmd_bayes,
    "sampling": cmd_sampling,
    "simulate": cmd_simulate,
    "completeness": cmd_completeness,
    "search": cmd_search,
    "verify": cmd_verify,
}


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, TheoremViolation):
        return 4
    if isinstance(exc, ResourceError):
        return 3
    if isinstance(exc, (ValidationError, StructuralError, DomainError, UsageError, PreconditionError)):
        return 2
    return 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = datetime.now(timezone.utc).isoformat() if args.record_time else None
    try:
        return COMMANDS[args.command](args, started)
    except ValidationError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return 2
    except LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
