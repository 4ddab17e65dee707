"""Structural checks on a computed minimal measure.

Every check returns a small report object with ``passed``, the measured
value and the tolerance, and :func:`check_record` flattens any of them into
a plain dict for serialization.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import null_space

from .divergence import DivergenceSpec, affine_scale_decomposition, f_prime, f_value
from .levy_model import FiniteAtomic, LevyTriplet
from .montecarlo import SimulationConfig, density_terminal, estimate, simulate
from .solver import (
    ExplicitGirsanov,
    SolverConfig,
    _measure_points,
    _multiplier,
    divergence_terms,
    drift_residual,
    fundamental_matrix,
    solve,
)

FUNDAMENTAL_TOL = 1e-9
SUPPORT_TOL = 1e-12
MARTINGALE_TOL = 1e-8
SCALE_TOL = 1e-10
TIME_TOL = 1e-9
DEFAULT_X_GRID = (0.5, 1.0, 2.0, 5.0)
DEFAULT_STEPS = (0.05, 0.1, 0.2, 0.3)


class DegenerateSupport(ValueError):
    """``Z_T`` is identically 1, so there is no support shape to classify."""


class NotApplicable(ValueError):
    pass


@dataclass
class FundamentalCheckReport:
    max_residual_equ: Optional[float]  # None when c = 0: the identity is not implied there
    rank1_defect: float
    grid: tuple[float, ...]
    tol: float = FUNDAMENTAL_TOL
    n_points: int = 0

    @property
    def applicable(self) -> bool:
        return self.max_residual_equ is not None

    @property
    def passed(self) -> bool:
        if self.rank1_defect >= self.tol:
            return False
        return self.max_residual_equ is None or self.max_residual_equ < self.tol


def fundamental_residual(spec: DivergenceSpec, params, x_grid=DEFAULT_X_GRID, nu=None, c=None,
                         tol: float = FUNDAMENTAL_TOL) -> FundamentalCheckReport:
    """Residual of ``f'(xY(y)) - f'(x) = x f''(x) <beta, e^y - 1> + <V, e^y - 1>`` and its rank-1 defect.

    The residual is ``|lhs - rhs| / (1 + |lhs|)``, maximised over ``x_grid``
    times the atoms of ``nu``.  The defect is ``s2 / s1`` for the singular
    values of the lhs matrix.  Passing ``c`` with ``c == 0`` marks the
    identity as not applicable; only the defect is then reported.
    """
    grid = tuple(float(x) for x in x_grid)
    if any(not x > 0 for x in grid):
        raise ValueError(f"x grid must lie in (0, inf), got {grid}")
    points = np.zeros((0, len(params.beta))) if nu is None else _measure_points(nu)
    pure_jump = c is not None and not np.any(np.asarray(c) != 0)
    if points.shape[0] == 0:
        return FundamentalCheckReport(None if pure_jump else 0.0, 0.0, grid, tol, 0)
    lhs, rhs = fundamental_matrix(spec, params, grid, points)
    resid = float(np.max(np.abs(lhs - rhs) / (1.0 + np.abs(lhs))))
    s = np.linalg.svd(lhs, compute_uv=False)
    defect = float(s[1] / s[0]) if s.size > 1 and s[0] > 0 else 0.0
    return FundamentalCheckReport(None if pure_jump else resid, defect, grid, tol, points.shape[0])


class SupportClass(enum.Enum):
    WholePositiveLine = "whole_positive_line"
    RayUpward = "ray_upward"  # [A, inf)
    RayDownward = "ray_downward"  # (0, A]


@dataclass
class SupportReport:
    kind: SupportClass
    quadratic_form: float
    log_y_signs: tuple[int, ...]


def classify_support(t: LevyTriplet, params, tol: float = SUPPORT_TOL) -> SupportReport:
    """Shape of the support of ``Z_T``: the whole half-line or a ray."""
    q = float(params.beta @ t.cov @ params.beta)
    pts = _measure_points(t.nu)
    with np.errstate(divide="ignore"):  # underflowed Y counts as below 1
        logs = np.log(np.asarray(_multiplier(params, pts), dtype=float)) if pts.shape[0] else np.zeros(0)
    signs = tuple(int(s) for s in np.where(np.abs(logs) > tol, np.sign(logs), 0))
    if abs(q) > tol:
        return SupportReport(SupportClass.WholePositiveLine, q, signs)
    moving = [s for s in signs if s != 0]
    if not moving:
        raise DegenerateSupport("beta'c beta = 0 and Y = 1 on every atom: Z_T is identically 1")
    if all(s > 0 for s in moving):
        kind = SupportClass.RayUpward
    elif all(s < 0 for s in moving):
        kind = SupportClass.RayDownward
    else:
        kind = SupportClass.WholePositiveLine
    return SupportReport(kind, q, signs)


@dataclass
class AlternativeResult:
    label: str
    drift_residual: float
    accepted: bool
    difference: float = math.nan  # E_Q[f'(Z*)] - E_Q*[f'(Z*)]
    se: float = math.nan
    passed: bool = True


@dataclass
class MinimalityReport:
    baseline: float
    baseline_se: float
    alternatives: list[AlternativeResult] = field(default_factory=list)
    n_paths: int = 0
    seed: int = 0
    k_se: float = 3.0

    @property
    def rejected(self) -> list[AlternativeResult]:
        return [a for a in self.alternatives if not a.accepted]

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.alternatives if a.accepted)


def minimality_certificate(t: LevyTriplet, spec: DivergenceSpec, params, alternatives: Sequence,
                           n_paths: int = 100_000, seed: int = 0, T: float = 1.0,
                           k_se: float = 3.0, labels: Optional[Sequence[str]] = None) -> MinimalityReport:
    """Compare ``E_Q[f'(Z*_T)]`` across martingale measures using one shared sample.

    Every expectation is a reweighting of the same P-paths, so the paired
    differences ``(Z_Q - Z*) f'(Z*)`` have small variance.  An alternative
    whose drift residual exceeds ``MARTINGALE_TOL`` is rejected unevaluated.
    """
    batch = simulate(t, SimulationConfig(T=T, n_paths=n_paths, seed=seed))
    z_star = density_terminal(batch, t, params)
    g = np.asarray(f_prime(spec, z_star))
    base = estimate(z_star * g)
    rep = MinimalityReport(base.mean, base.se, n_paths=n_paths, seed=seed, k_se=k_se)
    for k, alt in enumerate(alternatives):
        label = labels[k] if labels is not None else getattr(alt, "label", "") or f"alternative {k}"
        res = float(np.max(np.abs(drift_residual(t, alt))))
        if not res <= MARTINGALE_TOL:
            rep.alternatives.append(AlternativeResult(label, res, False, passed=False))
            continue
        z_alt = density_terminal(batch, t, alt)
        diff = estimate((z_alt - z_star) * g)
        ok = diff.mean >= -k_se * diff.se
        rep.alternatives.append(AlternativeResult(label, res, True, diff.mean, diff.se, ok))
    return rep


def constraint_alternatives(t: LevyTriplet, params, steps: Sequence[float] = DEFAULT_STEPS) -> list[ExplicitGirsanov]:
    """Martingale measures near ``params``, found by moving along the null space of the drift map.

    The drift is affine in ``(beta, Y(y_1), ..., Y(y_m))``, so every step in
    the null space of ``[c U | lambda_j (e^{y_j} - 1)]`` stays a martingale
    measure exactly.  ``U`` spans the range of ``c``.  Steps that make some
    ``Y`` non-positive are skipped.
    """
    nu = t.nu
    if not isinstance(nu, FiniteAtomic):
        raise NotApplicable("alternatives are built on atomic jump measures only")
    U = t.range_basis
    E = (np.expm1(nu.locations) * nu.masses[:, None]).T if nu.n_atoms else np.zeros((t.dim, 0))
    A = np.hstack([t.cov @ U, E])
    if A.shape[1] == 0:
        return []
    N = null_space(A)
    Y0 = np.asarray(_multiplier(params, nu.locations), dtype=float) if nu.n_atoms else np.zeros(0)
    r = U.shape[1]
    out = []
    for j, s in itertools.product(range(N.shape[1]), steps):
        for sign in (1.0, -1.0):
            v = sign * s * N[:, j]
            Y = Y0 + v[r:]
            if np.any(Y <= 0):
                continue
            out.append(ExplicitGirsanov(params.beta + U @ v[:r], nu.locations, Y,
                                        label=f"direction {j}, step {sign * s:+g}"))
    return out


@dataclass
class ScaleResult:
    scale: float
    coefficients: Optional[tuple[float, float, float]]
    max_rel_error: float
    passed: bool


@dataclass
class ScaleInvarianceReport:
    applicable: bool
    results: list[ScaleResult] = field(default_factory=list)
    tol: float = SCALE_TOL

    @property
    def passed(self) -> bool:
        return self.applicable and all(r.passed for r in self.results)


def scale_invariance_check(spec: DivergenceSpec, scales: Sequence[float] = (0.5, 2.0, math.e),
                           grid=None, tol: float = SCALE_TOL) -> ScaleInvarianceReport:
    """``f(ux) = A f(x) + B x + C`` on a log-spaced grid for each scale ``u``."""
    x = np.logspace(-3, 3, 61) if grid is None else np.asarray(grid, dtype=float)
    if affine_scale_decomposition(spec, 1.0) is None:
        return ScaleInvarianceReport(False, tol=tol)
    rep = ScaleInvarianceReport(True, tol=tol)
    for u in scales:
        A, B, C = affine_scale_decomposition(spec, u)
        lhs = f_value(spec, u * x)
        rhs = A * f_value(spec, x) + B * x + C
        err = float(np.max(np.abs(lhs - rhs) / np.maximum(1.0, np.abs(lhs))))
        rep.results.append(ScaleResult(float(u), (A, B, C), err, err < tol))
    return rep


@dataclass
class TimeInvarianceReport:
    horizons: tuple[float, ...]
    param_deviation: float
    law_deviation: float
    tol: float = TIME_TOL
    values: list[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.param_deviation < self.tol and self.law_deviation < self.tol


def _rate(tv, T):
    # per-unit-time quantity that must not depend on T
    return (tv.log_moment if tv.kind == "power" else tv.value) / T


def time_invariance_check(t: LevyTriplet, spec: DivergenceSpec, T_list: Sequence[float] = (1.0, 2.0, 5.0),
                          cfg: SolverConfig = SolverConfig(), tol: float = TIME_TOL) -> TimeInvarianceReport:
    """Re-solve at each horizon: parameters must agree and each divergence term must scale with T.

    Log terms grow linearly in T; for power terms the exponent of the moment does.
    """
    sols = [solve(t, spec, cfg, T) for T in T_list]
    vecs = [np.concatenate([s.beta, s.theta, s.V]) for s in sols]
    dev = max((float(np.max(np.abs(a - b))) for a, b in itertools.combinations(vecs, 2)), default=0.0)
    law = 0.0
    ref = [_rate(tv, T_list[0]) for tv in divergence_terms(t, spec, sols[0].params, T_list[0])]
    for s, T in zip(sols[1:], T_list[1:]):
        for r0, tv in zip(ref, divergence_terms(t, spec, s.params, T)):
            r = _rate(tv, T)
            law = max(law, abs(r - r0) / max(abs(r0), 1e-300) if r0 != 0 else abs(r))
    return TimeInvarianceReport(tuple(float(T) for T in T_list), dev, law, tol,
                                [s.divergence_value for s in sols])


def check_record(name: str, report) -> dict:
    """Flatten a check report into ``{name, passed, value, tolerance, ...}``."""
    rec = {"name": name}
    if isinstance(report, FundamentalCheckReport):
        rec.update(passed=report.passed, value=report.max_residual_equ, tolerance=report.tol,
                   rank1_defect=report.rank1_defect, grid=list(report.grid),
                   applicable=report.applicable)
    elif isinstance(report, SupportReport):
        rec.update(passed=True, value=report.kind.value, quadratic_form=report.quadratic_form,
                   log_y_signs=list(report.log_y_signs), tolerance=SUPPORT_TOL)
    elif isinstance(report, MinimalityReport):
        rec.update(
            passed=report.passed, value=report.baseline, se=report.baseline_se,
            tolerance=f"difference >= -{report.k_se:g} SE", n_paths=report.n_paths, seed=report.seed,
            alternatives=[
                {"label": a.label, "drift_residual": a.drift_residual, "accepted": a.accepted,
                 "difference": a.difference, "se": a.se, "passed": a.passed}
                for a in report.alternatives
            ],
        )
    elif isinstance(report, ScaleInvarianceReport):
        rec.update(passed=report.passed, applicable=report.applicable, tolerance=report.tol,
                   value=max((r.max_rel_error for r in report.results), default=None),
                   scales=[{"scale": r.scale, "coefficients": list(r.coefficients),
                            "max_rel_error": r.max_rel_error} for r in report.results])
    elif isinstance(report, TimeInvarianceReport):
        rec.update(passed=report.passed, value=max(report.param_deviation, report.law_deviation),
                   tolerance=report.tol, horizons=list(report.horizons),
                   param_deviation=report.param_deviation, law_deviation=report.law_deviation,
                   divergence_values=report.values)
    else:
        raise TypeError(f"no serializer for {type(report).__name__}")
    return rec
