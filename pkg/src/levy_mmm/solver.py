"""Girsanov parameters of the f-divergence minimal martingale measure.

A Lévy-preserving change of measure is described by a Brownian shift
``beta`` and a jump multiplier ``Y``.  For the minimal measure the multiplier
has the Esscher-type form

    Y(y) = (f')^{-1}( f'(1) + sum_i theta_i (e^{y_i} - 1) ),

with ``theta = f''(1) beta + V`` and ``V`` in the kernel of ``c``.  The
solver looks for ``(beta, V)`` such that

* the drift of every ``S^i = exp(X^i)`` vanishes, and
* when ``c`` is singular but non-zero, the fundamental identity
  ``f'(x Y(y)) - f'(x) = x f''(x) <beta, e^y - 1> + <V, e^y - 1>``
  holds on a grid of ``x`` values; this pins the part of ``beta`` lying in
  ``ker c``, which the drift cannot see.

When ``c = 0`` the only unknown is ``theta``; ``beta`` is reported as 0 and
``V = theta``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.special import xlogy

from .divergence import (
    DivergenceSpec,
    RangeError,
    f_prime,
    f_prime_inverse,
    f_second,
    f_value,
    is_power_family,
)
from .levy_model import (
    FiniteAtomic,
    LevyTriplet,
    NonFiniteIntegrand,
    QuadratureError,
    integral_finite,
    levy_integral,
    tail_finite,
)

_KERNEL_TOL = 1e-10
_TINY = np.finfo(float).tiny


class CandidateInvalid(ValueError):
    """The Esscher argument left the range of f' at some jump size."""

    def __init__(self, point, u, interval):
        super().__init__(
            f"Y undefined at y={np.asarray(point).tolist()}: argument {u} outside range {interval} of f'"
        )
        self.point = np.asarray(point)
        self.u = u
        self.interval = interval


class NoSolution(RuntimeError):
    def __init__(self, best_residual: float, best_params=None, starts: int = 0):
        super().__init__(f"no martingale measure found after {starts} starts; best residual {best_residual:.3e}")
        self.best_residual = best_residual
        self.best_params = best_params
        self.starts = starts


class ExistenceViolation(RuntimeError):
    """The drift equation can only be met with Y <= 0 somewhere, or an existence criterion fails."""

    def __init__(self, report: "ExistenceReport", params=None, message: str = ""):
        super().__init__(message or f"existence conditions fail: {report.failures()}")
        self.report = report
        self.params = params


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    max_iter: int = 100
    max_restarts: int = 16
    fd_step: float = 1e-7
    y_floor: float = 1e-8  # Y at or below this counts as not strictly positive
    x_grid: tuple[float, ...] = (0.5, 1.0, 2.0, 5.0)
    fix_kernel_zero: bool = False  # force V = 0 (diagnostic runs only)

    def __post_init__(self):
        if not (self.tol > 0 and self.fd_step > 0 and self.y_floor >= 0):
            raise ValueError("tol and fd_step must be positive and y_floor non-negative")
        if self.max_iter < 0 or self.max_restarts < 1:
            raise ValueError("max_iter must be >= 0 and max_restarts >= 1")
        if not self.x_grid or any(not x > 0 for x in self.x_grid):
            raise ValueError(f"x_grid must be non-empty and positive, got {self.x_grid}")


@dataclass(frozen=True, eq=False)
class GirsanovParams:
    """``(beta, theta, V)`` for a given divergence; ``Y`` follows from ``theta``."""

    beta: np.ndarray
    theta: np.ndarray
    V: np.ndarray
    spec: DivergenceSpec

    def __post_init__(self):
        for name in ("beta", "theta", "V"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))

    @classmethod
    def coupled(cls, spec: DivergenceSpec, beta, V) -> "GirsanovParams":
        beta = np.asarray(beta, dtype=float)
        V = np.asarray(V, dtype=float)
        return cls(beta, f_second(spec, 1.0) * beta + V, V, spec)

    @classmethod
    def identity(cls, spec: DivergenceSpec, dim: int) -> "GirsanovParams":
        z = np.zeros(dim)
        return cls(z, z, z, spec)

    def jump_multiplier(self, points) -> np.ndarray:
        return y_candidate(self.spec, self.theta, points)


@dataclass(frozen=True, eq=False)
class ExplicitGirsanov:
    """A Lévy-preserving change of measure with ``Y`` given at each atom."""

    beta: np.ndarray
    locations: np.ndarray
    y_values: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "beta", np.atleast_1d(np.asarray(self.beta, dtype=float)))
        object.__setattr__(self, "locations", np.atleast_2d(np.asarray(self.locations, dtype=float)))
        object.__setattr__(self, "y_values", np.atleast_1d(np.asarray(self.y_values, dtype=float)))

    def jump_multiplier(self, points) -> np.ndarray:
        points = np.atleast_2d(points)
        if points.shape != self.locations.shape or not np.array_equal(points, self.locations):
            raise KeyError("explicit jump multipliers are only known at their own atoms")
        return self.y_values


def _esscher_argument(spec: DivergenceSpec, theta, points):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return f_prime(spec, 1.0) + np.expm1(points) @ np.asarray(theta, dtype=float), points


def y_candidate(spec: DivergenceSpec, theta, y):
    """``(f')^{-1}(f'(1) + sum_i theta_i (e^{y_i} - 1))`` at one point or an ``(k, d)`` array."""
    scalar = np.ndim(y) <= 1
    u, points = _esscher_argument(spec, theta, y)
    lo, hi = spec.prime_range()
    bad = ~((u > lo) & (u < hi))
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        raise CandidateInvalid(points[k], float(u[k]), (lo, hi))
    out = np.asarray(f_prime_inverse(spec, u))
    return float(out[0]) if scalar else out


def _multiplier(params, points):
    try:
        return params.jump_multiplier(points)
    except RangeError as exc:  # pragma: no cover - y_candidate checks first
        raise CandidateInvalid(points[0], exc.u, exc.interval) from exc


def drift_residual(t: LevyTriplet, params) -> np.ndarray:
    """``b + diag(c)/2 + c beta + int[(e^y - 1) Y(y) - h(y)] nu(dy)``; zero iff S is a Q-martingale."""
    beta = params.beta
    out = t.b + 0.5 * np.diag(t.cov) + t.cov @ beta
    nu = t.nu
    if isinstance(nu, FiniteAtomic):
        if nu.n_atoms:
            y = nu.locations
            Y = _multiplier(params, y)
            out = out + (np.expm1(y) * Y[:, None] - t.h(y)).T @ nu.masses
        return out
    jump = np.empty(t.dim)
    for i in range(t.dim):
        def g(y, i=i):
            return np.expm1(y[:, i]) * _multiplier(params, y) - t.h(y)[:, i]
        jump[i] = levy_integral(nu, g)
    return out + jump


def _drift_fast(t: LevyTriplet, params) -> np.ndarray:
    """Drift residual at the base quadrature level (used inside Newton)."""
    if isinstance(t.nu, FiniteAtomic):
        return drift_residual(t, params)
    pts, wts = t.nu.nodes(0)
    Y = _multiplier(params, pts)
    jump = (np.expm1(pts) * Y[:, None] - t.h(pts)).T @ wts
    return t.b + 0.5 * np.diag(t.cov) + t.cov @ params.beta + jump


def fundamental_matrix(spec: DivergenceSpec, params, x_grid, points):
    """Left and right sides of the fundamental identity on ``x_grid`` x ``points``.

    ``lhs[i, j] = f'(x_i Y(y_j)) - f'(x_i)`` and
    ``rhs[i, j] = x_i f''(x_i) <beta, e^{y_j} - 1> + <V, e^{y_j} - 1>``.
    Points where ``Y`` underflows to 0 are left out.
    """
    x = np.asarray(x_grid, dtype=float)[:, None]
    points = np.atleast_2d(points)
    Y = np.asarray(_multiplier(params, points))
    # quadrature nodes far in a density's tail can underflow Y to 0; they carry no information
    keep = Y > 0
    points, Y = points[keep], Y[keep][None, :]
    em1 = np.expm1(points)
    lhs = f_prime(spec, x * Y) - f_prime(spec, x)
    rhs = x * f_second(spec, x) * (em1 @ params.beta)[None, :] + (em1 @ params.V)[None, :]
    return lhs, rhs


@dataclass
class ExistenceReport:
    y_positive: bool
    exp_integrable: bool
    hellinger_finite: bool
    predictable_integrable: bool
    y_min: float = math.nan
    notes: list[str] = field(default_factory=list)

    @property
    def overall(self) -> bool:
        return self.y_positive and self.exp_integrable and self.hellinger_finite and self.predictable_integrable

    def failures(self) -> list[str]:
        names = ("y_positive", "exp_integrable", "hellinger_finite", "predictable_integrable")
        return [n for n in names if not getattr(self, n)]

    def as_dict(self) -> dict:
        return {
            "y_positive": self.y_positive,
            "exp_integrable": self.exp_integrable,
            "hellinger_finite": self.hellinger_finite,
            "predictable_integrable": self.predictable_integrable,
            "overall": self.overall,
            "y_min": self.y_min,
        }


def _floor(t: LevyTriplet, y_floor: float) -> float:
    # On a density, Y is positive exactly when the Esscher argument is in range (checked when Y is
    # built); a computed 0 is underflow in the far tail, not a violation.
    return y_floor if isinstance(t.nu, FiniteAtomic) else -1.0


def _measure_points(nu):
    return nu.locations if isinstance(nu, FiniteAtomic) else nu.nodes(0)[0]


def check_existence(t: LevyTriplet, spec: DivergenceSpec, params, y_floor: float = 1e-8) -> ExistenceReport:
    """Positivity of Y, exponential integrability, Hellinger and predictable criteria."""
    nu = t.nu
    pts = _measure_points(nu)
    if pts.shape[0] == 0:
        return ExistenceReport(True, True, True, True, y_min=math.inf)
    try:
        Y = np.asarray(_multiplier(params, pts))
    except CandidateInvalid as exc:
        return ExistenceReport(False, False, False, False, notes=[str(exc)])
    y_min = float(Y.min())
    floor = _floor(t, y_floor)
    if not y_min > floor:
        return ExistenceReport(False, False, False, False, y_min=y_min,
                               notes=[f"min Y = {y_min:.3e} <= {floor:.1e}"])
    f1, fp1 = f_value(spec, 1.0), f_prime(spec, 1.0)

    def safe_Y(y):
        try:
            return np.maximum(np.asarray(_multiplier(params, y)), _TINY)
        except CandidateInvalid:
            return np.full(y.shape[0], np.nan)

    def exp_part(y):
        big = np.linalg.norm(y, axis=1) >= 1.0
        return big * np.sum(np.abs(np.expm1(y)), axis=1) * safe_Y(y)

    def hell(y):
        return (np.sqrt(safe_Y(y)) - 1.0) ** 2

    def pred(y):
        Yv = safe_Y(y)
        with np.errstate(invalid="ignore", divide="ignore"):
            return f_value(spec, np.where(Yv > 0, Yv, np.nan)) - f1 - fp1 * (Yv - 1.0)

    exp_ok = tail_finite(nu, exp_part)[0]
    return ExistenceReport(
        y_positive=True,
        exp_integrable=exp_ok,
        hellinger_finite=integral_finite(nu, hell),
        predictable_integrable=integral_finite(nu, pred),
        y_min=y_min,
    )


def hellinger_rate(t: LevyTriplet, params) -> float:
    """Per-unit-time Hellinger process of order 1/2: ``beta'c beta / 2 + int (sqrt Y - 1)^2 dnu / 8``."""
    beta = params.beta
    cont = 0.5 * float(beta @ t.cov @ beta)
    if isinstance(t.nu, FiniteAtomic) and t.nu.n_atoms == 0:
        return cont

    def g(y):
        return (np.sqrt(_multiplier(params, y)) - 1.0) ** 2

    if not integral_finite(t.nu, g):
        return math.inf
    return cont + levy_integral(t.nu, g) / 8.0


@dataclass(frozen=True)
class TermValue:
    gamma: float
    weight: float
    kind: str  # "power" (value = c_g * exp(log_moment)) or "log"
    value: float  # contribution weight * E_P[f_g(Z_T)]
    log_moment: float = math.nan  # for power terms: log E_P[Z_T^alpha]


def divergence_terms(t: LevyTriplet, spec: DivergenceSpec, params, T: float) -> list[TermValue]:
    """Closed-form ``E_P[f_g(Z_T)]`` for each building block of ``spec``.

    Power blocks use ``log E Z^a = T (a(a-1) beta'c beta / 2 + int (Y^a - 1 - a(Y - 1)) dnu)``;
    ``x ln x`` gives ``T (beta'c beta / 2 + int (Y ln Y - Y + 1) dnu)`` and
    ``-ln x`` gives ``T (beta'c beta / 2 + int (Y - 1 - ln Y) dnu)``.
    """
    if not T > 0:
        raise ValueError(f"horizon must be positive, got {T}")
    bcb = float(params.beta @ t.cov @ params.beta)
    has_jumps = not (isinstance(t.nu, FiniteAtomic) and t.nu.n_atoms == 0)

    def jump(g):
        return levy_integral(t.nu, lambda y: g(np.asarray(_multiplier(params, y)))) if has_jumps else 0.0

    out = []
    for w, gam in spec.terms:
        if gam == -1.0:
            rate = 0.5 * bcb + jump(lambda Y: xlogy(Y, Y) - Y + 1.0)
            out.append(TermValue(gam, w, "log", w * T * rate))
        elif gam == -2.0:
            rate = 0.5 * bcb + jump(lambda Y: Y - 1.0 - np.log(Y))
            out.append(TermValue(gam, w, "log", w * T * rate))
        else:
            a = gam + 2.0
            rate = 0.5 * a * (a - 1.0) * bcb + jump(lambda Y, a=a: Y**a - 1.0 - a * (Y - 1.0))
            expo = T * rate
            if expo > 709.0:
                raise OverflowError(f"E[Z_T^{a:g}] = exp({expo:.6g}) overflows")
            sign = math.copysign(1.0, (gam + 1.0) / (gam + 2.0))
            out.append(TermValue(gam, w, "power", w * sign * math.exp(expo), expo))
    return out


def divergence_closed_form(t: LevyTriplet, spec: DivergenceSpec, params, T: float) -> float:
    """``E_P[f(Z_T)]``, summing the building blocks plus ``B + C`` for the affine part."""
    return sum(tv.value for tv in divergence_terms(t, spec, params, T)) + spec.linear + spec.constant


@dataclass(frozen=True)
class EsscherForm:
    """Closed form of ``Y`` for a single-term divergence.

    ``kind == "exponential"``: ``Y(y) = exp(<theta, e^y - 1> / scale)``;
    ``kind == "power"``: ``Y(y) = (1 + <theta, e^y - 1> / scale)^exponent``.
    """

    kind: str
    theta: tuple[float, ...]
    scale: float
    exponent: float = 1.0

    def __call__(self, y) -> np.ndarray:
        s = np.expm1(np.atleast_2d(y)) @ np.asarray(self.theta)
        if self.kind == "exponential":
            return np.exp(s / self.scale)
        return (1.0 + s / self.scale) ** self.exponent

    def describe(self) -> str:
        th = ", ".join(f"{v:.6g}" for v in self.theta)
        if self.kind == "exponential":
            return f"Y(y) = exp(<({th}), e^y - 1> / {self.scale:.6g})"
        return f"Y(y) = (1 + <({th}), e^y - 1> / {self.scale:.6g})^({self.exponent:.6g})"


def esscher_form(spec: DivergenceSpec, theta) -> Optional[EsscherForm]:
    pf = is_power_family(spec)
    if pf is None:
        return None
    a, gam = pf
    theta = tuple(float(v) for v in np.atleast_1d(theta))
    if gam == -1.0:
        return EsscherForm("exponential", theta, a)
    return EsscherForm("power", theta, a / (gam + 1.0), 1.0 / (gam + 1.0))


@dataclass
class MinimalMeasureSolution:
    params: GirsanovParams
    drift_residual_norm: float
    fundamental_residual: float
    existence: ExistenceReport
    hellinger_rate: float
    divergence_value: float
    horizon: float
    status: str = "solved"
    iterations: int = 0
    start_index: int = 0
    kernel_zero: bool = False

    @property
    def beta(self):
        return self.params.beta

    @property
    def theta(self):
        return self.params.theta

    @property
    def V(self):
        return self.params.V


class _Problem:
    """Unknown vector layout and residual map for one solve."""

    def __init__(self, t: LevyTriplet, spec: DivergenceSpec, cfg: SolverConfig):
        self.t, self.spec, self.cfg = t, spec, cfg
        self.fpp1 = f_second(spec, 1.0)
        self.d = t.dim
        self.pure_jump = t.rank == 0
        K = t.kernel_basis
        self.K = np.zeros((self.d, 0)) if cfg.fix_kernel_zero else K
        self.use_fund = (not self.pure_jump) and t.rank < self.d and not self._no_jumps()
        if self.pure_jump:
            self.n = self.d
        else:
            self.n = self.d + self.K.shape[1]
        x = np.asarray(cfg.x_grid, dtype=float)
        self.x_fund = x[x != 1.0]
        pts = _measure_points(t.nu)
        self.fund_points = pts
        self.fund_weights = (
            np.ones(pts.shape[0]) if isinstance(t.nu, FiniteAtomic) else np.sqrt(t.nu.nodes(0)[1] + 0.0)
        )

    def _no_jumps(self):
        return isinstance(self.t.nu, FiniteAtomic) and self.t.nu.n_atoms == 0

    def params(self, z) -> GirsanovParams:
        if self.pure_jump:
            zero = np.zeros(self.d)
            return GirsanovParams(zero, z.copy(), z.copy(), self.spec)
        beta = z[: self.d]
        V = self.K @ z[self.d:]
        return GirsanovParams(beta.copy(), self.fpp1 * beta + V, V, self.spec)

    def residual(self, z, drift_only=False) -> np.ndarray:
        p = self.params(z)
        dr = _drift_fast(self.t, p)
        if drift_only or not self.use_fund or self.x_fund.size == 0:
            return dr
        keep = np.asarray(_multiplier(p, self.fund_points)) > 0
        lhs, rhs = fundamental_matrix(self.spec, p, self.x_fund, self.fund_points[keep])
        full = np.zeros((self.x_fund.size, keep.size))  # fixed length for the Jacobian
        full[:, keep] = (lhs - rhs) * self.fund_weights[keep][None, :]
        fund = full.ravel()
        return np.concatenate([dr, fund])

    def starts(self) -> list[np.ndarray]:
        out = [np.zeros(self.n)]
        for scale in (0.5, 2.0, 0.1):
            for signs in itertools.product((1.0, -1.0), repeat=self.n):
                out.append(scale * np.array(signs))
        return out[: max(1, self.cfg.max_restarts)]


def _safe_residual(prob: _Problem, z, drift_only=False):
    try:
        r = prob.residual(z, drift_only)
    except (CandidateInvalid, NonFiniteIntegrand, FloatingPointError):
        return None
    if not np.all(np.isfinite(r)):
        return None
    return r


def _jacobian(prob: _Problem, z, r0, drift_only):
    J = np.empty((r0.size, z.size))
    for j in range(z.size):
        h = prob.cfg.fd_step * max(1.0, abs(z[j]))
        zp = z.copy()
        zp[j] += h
        rp = _safe_residual(prob, zp, drift_only)
        if rp is None:
            zp[j] = z[j] - h
            rp = _safe_residual(prob, zp, drift_only)
            if rp is None:
                return None
            J[:, j] = (r0 - rp) / h
        else:
            J[:, j] = (rp - r0) / h
    return J


def _newton(prob: _Problem, z, drift_only=False):
    """Damped Gauss-Newton with least-squares steps; returns (z, residual, iterations)."""
    r = _safe_residual(prob, z, drift_only)
    if r is None:
        return z, None, 0
    tol = prob.cfg.tol
    it = 0
    for it in range(1, prob.cfg.max_iter + 1):
        if np.max(np.abs(r)) <= tol:
            break
        J = _jacobian(prob, z, r, drift_only)
        if J is None:
            break
        dz = np.linalg.lstsq(J, -r, rcond=1e-9)[0]
        norm0 = float(r @ r)
        lam, accepted = 1.0, False
        while lam > 1e-12:
            z_new = z + lam * dz
            r_new = _safe_residual(prob, z_new, drift_only)
            if r_new is not None and float(r_new @ r_new) < norm0:
                z, r, accepted = z_new, r_new, True
                break
            lam *= 0.5
        if not accepted:
            break
    return z, r, it


def _min_y(prob: _Problem, z) -> float:
    pts = prob.fund_points
    if pts.shape[0] == 0:
        return math.inf
    try:
        return float(np.min(_multiplier(prob.params(z), pts)))
    except CandidateInvalid:
        return -math.inf


def _canonicalise(prob: _Problem, z) -> np.ndarray:
    """Move any undetermined kernel part of beta into V (theta unchanged)."""
    if prob.pure_jump or prob.K.shape[1] == 0:
        return z
    beta = z[: prob.d]
    k = prob.K.T @ beta
    if np.max(np.abs(k), initial=0.0) == 0.0:
        return z
    z2 = z.copy()
    z2[: prob.d] = beta - prob.K @ k
    z2[prob.d:] = z[prob.d:] + prob.fpp1 * k
    r_old = _safe_residual(prob, z)
    r_new = _safe_residual(prob, z2)
    if r_new is not None and np.max(np.abs(r_new)) <= max(prob.cfg.tol, np.max(np.abs(r_old))):
        return z2
    return z


def _fund_residual_max(t, spec, params, x_grid) -> float:
    pts = _measure_points(t.nu)
    if pts.shape[0] == 0 or t.rank == 0:
        return 0.0
    lhs, rhs = fundamental_matrix(spec, params, x_grid, pts)
    return float(np.max(np.abs(lhs - rhs) / (1.0 + np.abs(lhs))))


def solve(t: LevyTriplet, spec: DivergenceSpec, cfg: SolverConfig = SolverConfig(), T: float = 1.0) -> MinimalMeasureSolution:
    """Find the Girsanov parameters of the minimal martingale measure.

    Raises :class:`ExistenceViolation` when the drift can only be cancelled
    with a non-positive jump multiplier, :class:`NoSolution` when no start
    converges.
    """
    prob = _Problem(t, spec, cfg)
    best = (math.inf, None)
    y_violation = None
    n_starts = 0
    for k, z0 in enumerate(prob.starts()):
        n_starts += 1
        z, r, it = _newton(prob, z0)
        if r is None:
            continue
        drift = _safe_residual(prob, z, drift_only=True)
        if drift is None:
            continue
        if np.max(np.abs(drift)) > cfg.tol:
            # stacked system inconsistent: restore the martingale condition alone
            z, _, it2 = _newton(prob, z, drift_only=True)
            it += it2
            drift = _safe_residual(prob, z, drift_only=True)
            if drift is None:
                continue
        dnorm = float(np.max(np.abs(drift)))
        if dnorm < best[0]:
            best = (dnorm, prob.params(z))
        y_min = _min_y(prob, z)
        if y_min <= _floor(t, cfg.y_floor):
            y_violation = (prob.params(z), y_min)
            continue
        if dnorm > cfg.tol:
            continue
        z = _canonicalise(prob, z)
        params = prob.params(z)
        # quadrature levels must agree at the root
        full = drift_residual(t, params)
        existence = check_existence(t, spec, params, cfg.y_floor)
        if not existence.overall:
            raise ExistenceViolation(existence, params)
        kernel_zero = prob.K.shape[1] > 0 and float(np.max(np.abs(params.V))) <= _KERNEL_TOL
        return MinimalMeasureSolution(
            params=params,
            drift_residual_norm=float(np.max(np.abs(full))),
            fundamental_residual=_fund_residual_max(t, spec, params, cfg.x_grid),
            existence=existence,
            hellinger_rate=hellinger_rate(t, params),
            divergence_value=divergence_closed_form(t, spec, params, T),
            horizon=T,
            iterations=it,
            start_index=k,
            kernel_zero=kernel_zero,
        )
    if y_violation is not None:
        params, y_min = y_violation
        rep = ExistenceReport(False, False, False, False, y_min=y_min,
                              notes=["drift can only vanish as Y -> 0 at some jump size"])
        raise ExistenceViolation(rep, params, f"existence condition fails: solver drives min Y to {y_min:.3e}")
    if best[1] is None:
        rep = ExistenceReport(False, False, False, False,
                              notes=["Y leaves the range of f' from every start"])
        raise ExistenceViolation(rep, None, "existence condition fails: no start gives a well-defined Y")
    raise NoSolution(best[0], best[1], n_starts)


def with_horizon(sol: MinimalMeasureSolution, t: LevyTriplet, T: float) -> MinimalMeasureSolution:
    return replace(sol, horizon=T, divergence_value=divergence_closed_form(t, sol.params.spec, sol.params, T))


def solution_report(t: LevyTriplet, sol: MinimalMeasureSolution) -> dict:
    p = sol.params
    rep = {
        "status": sol.status,
        "beta": p.beta.tolist(),
        "theta": p.theta.tolist(),
        "V": p.V.tolist(),
        "drift_residual": sol.drift_residual_norm,
        "fundamental_residual": sol.fundamental_residual,
        "existence": sol.existence.as_dict(),
        "hellinger_rate": sol.hellinger_rate,
        "horizon": sol.horizon,
        "divergence": sol.divergence_value,
        "kernel_V_zero": sol.kernel_zero,
    }
    if isinstance(t.nu, FiniteAtomic) and t.nu.n_atoms:
        Y = p.jump_multiplier(t.nu.locations)
        rep["Y_at_atoms"] = [
            {"y": loc.tolist(), "Y": float(v)} for loc, v in zip(t.nu.locations, Y)
        ]
    return rep
