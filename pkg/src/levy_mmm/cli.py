"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 no solution found,
3 existence condition violated, 4 a verification check or a reference
comparison failed.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional

import numpy as np

from . import __version__, rng
from .config import SCHEMA_VERSION, ConfigError, RunConfig, load_config
from .divergence import DivergenceSpec
from .levy_model import FiniteAtomic, LevyTriplet, validate_triplet
from .models import two_asset_closed_form, two_asset_divergence, two_asset_triplet
from .montecarlo import (
    SimulationConfig,
    density_terminal,
    dump_paths,
    estimate,
    mc_characteristic_check,
    mc_divergence,
    mc_martingale_check,
    poisson_count_gof,
    simulate,
)
from .solver import (
    ExistenceViolation,
    MinimalMeasureSolution,
    NoSolution,
    divergence_terms,
    solution_report,
    solve,
)
from .verifier import (
    DegenerateSupport,
    check_record,
    classify_support,
    constraint_alternatives,
    fundamental_residual,
    minimality_certificate,
    scale_invariance_check,
    time_invariance_check,
)

EXIT_OK, EXIT_CONFIG, EXIT_NO_SOLUTION, EXIT_EXISTENCE, EXIT_CHECK_FAILED = 0, 1, 2, 3, 4
GOLDEN_TOL = 1e-8
DRIFT_TOL = 1e-10
MC_K = 4.0
TIME_HORIZONS = (1.0, 2.0, 5.0)


def _clean(x):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return x
    return x


def _flatten(prefix, x, out):
    if isinstance(x, dict):
        for k, v in x.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, out)
    elif isinstance(x, list) and any(isinstance(v, (dict, list)) for v in x):
        for i, v in enumerate(x):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append(f"{prefix} = {json.dumps(x)}")


def render(report: dict, fmt: str = "json") -> str:
    report = _clean(report)
    if fmt == "text":
        lines = []
        _flatten("", report, lines)
        return "\n".join(lines) + "\n"
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def _header(command: str, cfg: Optional[RunConfig]) -> dict:
    head = {"schema_version": SCHEMA_VERSION, "tool": "levy-mmm", "tool_version": __version__,
            "command": command, "generator": rng.GENERATOR_NAME}
    if cfg is not None:
        head.update(config_hash=cfg.config_hash(), seed=cfg.simulation.seed, n_paths=cfg.simulation.n_paths)
    return head


def _model_summary(t: LevyTriplet) -> dict:
    out = {"dim": t.dim, "b": t.b, "c": t.c, "truncation": t.trunc.value}
    nu = t.nu
    if isinstance(nu, FiniteAtomic):
        out["nu"] = {"type": "atomic", "atoms": [{"y": y, "mass": m} for y, m in zip(nu.locations, nu.masses)]}
    else:
        out["nu"] = {"type": "radial", "label": nu.label}
    return out


def _spec_summary(spec: DivergenceSpec) -> dict:
    return {"terms": [{"weight": w, "gamma": g} for w, g in spec.terms],
            "linear": spec.linear, "constant": spec.constant}


def _solve(cfg: RunConfig, report: dict):
    """Validate, solve and record the outcome; returns ``(solution or None, exit code)``."""
    val = validate_triplet(cfg.model)
    report["model"] = _model_summary(cfg.model)
    report["divergence_spec"] = _spec_summary(cfg.divergence)
    if not val.ok:
        report["status"] = "invalid_model"
        report["failed_checks"] = val.failed()
        return None, EXIT_CONFIG
    try:
        sol = solve(cfg.model, cfg.divergence, cfg.solver, cfg.simulation.T)
    except ExistenceViolation as exc:
        report["status"] = "existence_violation"
        report["error"] = "ExistenceViolation"
        report["message"] = str(exc) or "existence condition fails"
        report["existence"] = exc.report.as_dict()
        report["existence"]["failures"] = exc.report.failures()
        report["existence"]["notes"] = list(exc.report.notes)
        if exc.params is not None:
            report["candidate"] = {"beta": exc.params.beta, "theta": exc.params.theta, "V": exc.params.V}
        return None, EXIT_EXISTENCE
    except NoSolution as exc:
        report["status"] = "no_solution"
        report["error"] = "NoSolution"
        report["best_drift_residual"] = exc.best_residual
        report["starts"] = exc.starts
        return None, EXIT_NO_SOLUTION
    report["solution"] = solution_report(cfg.model, sol)
    report["status"] = "solved"
    return sol, EXIT_OK


def cmd_solve(cfg: RunConfig):
    report = _header("solve", cfg)
    _, code = _solve(cfg, report)
    report["exit_code"] = code
    return report, code


def _skipped(name: str, reason: str) -> dict:
    return {"name": name, "passed": True, "skipped": True, "reason": reason}


def _mc_check(cfg: RunConfig, sol: MinimalMeasureSolution) -> dict:
    t = cfg.model
    batch = simulate(t, cfg.simulation)
    z = density_terminal(batch, t, sol.params)
    mart = mc_martingale_check(batch, t, sol.params, z, k=MC_K)
    mass = estimate(z)
    div = mc_divergence(batch, t, cfg.divergence, sol.params, z)
    div_ok = div.within(sol.divergence_value, MC_K)
    passed = all(a.passed for a in mart) and mass.within(1.0, MC_K) and div_ok
    return {
        "name": "montecarlo", "passed": passed, "tolerance": f"within {MC_K:g} SE",
        "martingale": [{"asset": a.asset, "mean": a.estimate.mean, "se": a.estimate.se, "passed": a.passed,
                        "overflow_paths": a.n_overflow} for a in mart],
        "density_mean": {"mean": mass.mean, "se": mass.se, "passed": mass.within(1.0, MC_K)},
        "divergence": {"closed_form": sol.divergence_value, "mean": div.mean, "se": div.se,
                       "nonfinite": div.n_nonfinite, "passed": div_ok},
    }


def run_checks(cfg: RunConfig, sol: MinimalMeasureSolution) -> list[dict]:
    t, spec, on = cfg.model, cfg.divergence, cfg.checks
    atomic = isinstance(t.nu, FiniteAtomic)
    out = []
    if on["existence"]:
        out.append({"name": "existence", "passed": sol.existence.overall, **sol.existence.as_dict()})
    if on["fundamental"]:
        out.append(check_record("fundamental",
                                fundamental_residual(spec, sol.params, cfg.solver.x_grid, t.nu, t.c)))
    if on["support"]:
        try:
            out.append(check_record("support", classify_support(t, sol.params)))
        except DegenerateSupport as exc:
            out.append({"name": "support", "passed": True, "value": "degenerate", "reason": str(exc)})
    if on["minimality"]:
        if atomic:
            alts = constraint_alternatives(t, sol.params)
            rep = minimality_certificate(t, spec, sol.params, alts, cfg.simulation.n_paths,
                                         cfg.simulation.seed, cfg.simulation.T)
            out.append(check_record("minimality", rep))
        else:
            out.append(_skipped("minimality", "Monte Carlo needs an atomic jump measure"))
    if on["scale"]:
        rep = scale_invariance_check(spec)
        out.append(check_record("scale", rep) if rep.applicable
                   else _skipped("scale", "multi-term divergence has no affine scale decomposition"))
    if on["time"]:
        out.append(check_record("time", time_invariance_check(t, spec, TIME_HORIZONS, cfg.solver)))
    if on["montecarlo"]:
        out.append(_mc_check(cfg, sol) if atomic
                   else _skipped("montecarlo", "Monte Carlo needs an atomic jump measure"))
    return out


def cmd_verify(cfg: RunConfig):
    report = _header("verify", cfg)
    sol, code = _solve(cfg, report)
    if sol is not None:
        checks = run_checks(cfg, sol)
        report["checks"] = checks
        report["all_passed"] = all(c["passed"] for c in checks)
        code = EXIT_OK if report["all_passed"] else EXIT_CHECK_FAILED
    report["exit_code"] = code
    return report, code


def cmd_example_6_1():
    t, spec = two_asset_triplet(), two_asset_divergence()
    report = _header("example-6-1", None)
    report["model"] = _model_summary(t)
    report["divergence_spec"] = _spec_summary(spec)
    sol = solve(t, spec)
    ref = two_asset_closed_form()
    y_a = float(sol.params.jump_multiplier(t.nu.locations)[0])
    got = {
        "beta1": sol.beta[0],
        "beta2": sol.beta[1],
        "Y_a": y_a,
        "v1": sol.V[0],
        "beta1_plus_2beta2": sol.beta[0] + 2 * sol.beta[1],
    }
    rows = []
    for k, v in got.items():
        err = abs(float(v) - ref[k])
        rows.append({"quantity": k, "computed": float(v), "reference": ref[k], "abs_error": err,
                     "passed": err < GOLDEN_TOL})
    report["comparison"] = rows
    report["consistency"] = {"beta1_plus_2beta2_equals_Y_a_minus_1": abs(got["beta1_plus_2beta2"] - (y_a - 1.0))}
    report["drift_residual"] = sol.drift_residual_norm
    report["fundamental_residual"] = sol.fundamental_residual
    ok = all(r["passed"] for r in rows) and sol.drift_residual_norm < DRIFT_TOL
    report["all_passed"] = ok
    code = EXIT_OK if ok else EXIT_CHECK_FAILED
    report["exit_code"] = code
    return report, code


def cmd_simulate(cfg: RunConfig, dump: Optional[str] = None):
    report = _header("simulate", cfg)
    t = cfg.model
    if not isinstance(t.nu, FiniteAtomic):
        report["status"] = "unsupported_measure"
        report["exit_code"] = EXIT_CONFIG
        return report, EXIT_CONFIG
    batch = simulate(t, cfg.simulation)
    report["model"] = _model_summary(t)
    report["horizon"] = cfg.simulation.T
    xs = [estimate(batch.X[:, i]) for i in range(t.dim)]
    report["terminal_mean"] = [{"mean": e.mean, "se": e.se} for e in xs]
    if t.nu.n_atoms:
        report["jump_count_mean"] = batch.counts.mean(axis=0)
        report["jump_count_gof_pvalue"] = poisson_count_gof(batch, t)
    cf = []
    for scale in (1.0, 0.5):
        for i in range(t.dim):
            u = np.zeros(t.dim)
            u[i] = scale
            r = mc_characteristic_check(batch, t, u)
            cf.append({"u": r["u"], "target": list(r["target"]), "real": r["real"].mean,
                       "imag": r["imag"].mean, "passed": r["passed"]})
    report["characteristic_function"] = cf
    if dump is not None:
        z = None
        try:
            sol = solve(t, cfg.divergence, cfg.solver, cfg.simulation.T)
            z = density_terminal(batch, t, sol.params)
        except (ExistenceViolation, NoSolution):
            pass
        dump_paths(batch, z, dump)
        report["path_dump"] = dump
    report["status"] = "simulated"
    report["exit_code"] = EXIT_OK
    return report, EXIT_OK


def cmd_divergence(cfg: RunConfig):
    report = _header("divergence", cfg)
    sol, code = _solve(cfg, report)
    if sol is not None:
        T = cfg.simulation.T
        terms = divergence_terms(cfg.model, cfg.divergence, sol.params, T)
        report["divergence"] = {
            "horizon": T,
            "closed_form": sol.divergence_value,
            "terms": [{"gamma": tv.gamma, "weight": tv.weight, "kind": tv.kind, "value": tv.value,
                       "log_moment": tv.log_moment} for tv in terms],
        }
        if isinstance(cfg.model.nu, FiniteAtomic):
            batch = simulate(cfg.model, cfg.simulation)
            est = mc_divergence(batch, cfg.model, cfg.divergence, sol.params)
            report["divergence"]["montecarlo"] = {"mean": est.mean, "se": est.se,
                                                  "z_score": est.z_score(sol.divergence_value)}
    report["exit_code"] = code
    return report, code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="levy-mmm", description="Minimal f-divergence martingale measures "
                                "for exponential Lévy models.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, needs_config in (("solve", True), ("verify", True), ("example-6-1", False),
                               ("simulate", True), ("divergence", True)):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=needs_config, help="JSON run configuration")
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--seed", type=int, help="override simulation.seed")
        sp.add_argument("--paths", type=int, help="override simulation.n_paths")
        fmt = sp.add_mutually_exclusive_group()
        fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
        fmt.add_argument("--text", dest="fmt", action="store_const", const="text")
        sp.set_defaults(fmt="json")
        if name == "simulate":
            sp.add_argument("--dump", help="write one CSV row per path here")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "example-6-1":
            report, code = cmd_example_6_1()
        else:
            cfg = load_config(args.config, seed=args.seed, paths=args.paths)
            if args.command == "solve":
                report, code = cmd_solve(cfg)
            elif args.command == "verify":
                report, code = cmd_verify(cfg)
            elif args.command == "simulate":
                report, code = cmd_simulate(cfg, args.dump)
            else:
                report, code = cmd_divergence(cfg)
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render(report, args.fmt)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
