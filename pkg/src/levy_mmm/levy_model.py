"""Lévy triplets, Lévy measures and integration against them.

Two kinds of jump measure are supported:

* :class:`FiniteAtomic` -- finitely many atoms; every integral is an exact
  weighted sum and the measure can be simulated exactly.
* :class:`RadialDensity` -- a density on R^d minus a small box around the
  origin, integrated with graded Gauss-Legendre shells.  Integrals are
  reported only when doubling the node count changes them by less than
  ``REFINE_RTOL``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Union

import numpy as np

SYM_TOL = 1e-12
PSD_TOL = 1e-10
RANK_TOL = 1e-10
REFINE_RTOL = 1e-6


class QuadratureError(RuntimeError):
    """Raised when a density integral does not settle under node doubling."""

    def __init__(self, message: str, node_counts: tuple[int, ...]):
        super().__init__(f"{message} (node counts tried: {node_counts})")
        self.node_counts = node_counts


class NonFiniteIntegrand(ValueError):
    def __init__(self, point: np.ndarray, value: float):
        super().__init__(f"integrand is {value} at node y={np.asarray(point).tolist()}")
        self.point = np.asarray(point)
        self.value = value


class Truncation(enum.Enum):
    CANONICAL = "canonical"  # h(y) = y 1{|y| <= 1}
    ZERO = "zero"  # h = 0, finite variation only

    def __call__(self, y: np.ndarray) -> np.ndarray:
        y = np.atleast_2d(y)
        if self is Truncation.ZERO:
            return np.zeros_like(y)
        inside = np.linalg.norm(y, axis=1) <= 1.0
        return y * inside[:, None]


@dataclass(frozen=True, eq=False)
class FiniteAtomic:
    """Jump measure with atoms ``locations[j]`` carrying mass ``masses[j]``."""

    locations: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        loc = np.atleast_2d(np.asarray(self.locations, dtype=float))
        mass = np.atleast_1d(np.asarray(self.masses, dtype=float))
        if loc.size == 0:
            loc = loc.reshape(0, loc.shape[-1] if loc.ndim == 2 else 1)
        if loc.shape[0] != mass.shape[0]:
            raise ValueError(f"{loc.shape[0]} atom locations but {mass.shape[0]} masses")
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "masses", mass)

    @classmethod
    def empty(cls, dim: int) -> "FiniteAtomic":
        return cls(np.zeros((0, dim)), np.zeros(0))

    @property
    def dim(self) -> int:
        return self.locations.shape[1]

    @property
    def n_atoms(self) -> int:
        return self.masses.shape[0]

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def nodes(self, level: int = 0) -> tuple[np.ndarray, np.ndarray]:
        return self.locations, self.masses


def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _box_rule(lows, highs, n):
    """Tensor Gauss-Legendre rule on an axis-aligned box."""
    x, w = _gauss_legendre(n)
    axes_pts, axes_w = [], []
    for lo, hi in zip(lows, highs):
        half = 0.5 * (hi - lo)
        axes_pts.append(lo + half * (x + 1.0))
        axes_w.append(half * w)
    grids = np.meshgrid(*axes_pts, indexing="ij")
    wgrids = np.meshgrid(*axes_w, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wts = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    return pts, wts


def shell_rule(dim: int, r_in: float, r_out: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for the cube shell ``r_in <= |y|_inf <= r_out``.

    The shell is cut into the 3^d - 1 boxes surrounding the inner cube.
    """
    pieces = [(-r_out, -r_in), (-r_in, r_in), (r_in, r_out)]
    pts, wts = [], []
    for combo in np.ndindex(*(3,) * dim):
        if all(c == 1 for c in combo):
            continue
        lows = [pieces[c][0] for c in combo]
        highs = [pieces[c][1] for c in combo]
        p, w = _box_rule(lows, highs, n)
        pts.append(p)
        wts.append(w)
    return np.concatenate(pts), np.concatenate(wts)


@dataclass(frozen=True, eq=False)
class RadialDensity:
    """Jump measure ``nu(dy) = density(y) dy`` on ``r_min <= |y|_inf <= r_max``.

    ``density`` maps an ``(k, dim)`` array of points to ``k`` non-negative
    values.  The quadrature is graded: decade shells from ``r_min`` up to 1
    and octave shells from 1 up to ``r_max``, each with ``n_nodes``
    Gauss-Legendre points per axis.  Mass inside the exclusion box
    ``|y|_inf < r_min`` and beyond ``r_max`` is ignored; integrands used by
    this package vanish quadratically at the origin, so the first omission is
    O(r_min^2).
    """

    density: Callable[[np.ndarray], np.ndarray]
    dim: int = 1
    r_min: float = 1e-6
    r_max: float = 30.0
    n_nodes: int = 16
    label: str = "density"

    def radii(self) -> np.ndarray:
        inner = np.geomspace(self.r_min, 1.0, int(round(np.log10(1.0 / self.r_min))) + 1)
        n_outer = max(1, int(np.ceil(np.log2(self.r_max))))
        outer = np.geomspace(1.0, self.r_max, n_outer + 1)
        return np.concatenate([inner, outer[1:]])

    def nodes(self, level: int = 0) -> tuple[np.ndarray, np.ndarray]:
        return self._nodes(self.n_nodes * 2**level)

    def _nodes(self, n: int):
        cache = self.__dict__.setdefault("_node_cache", {})
        if n not in cache:
            r = self.radii()
            pts, wts = [], []
            for r_in, r_out in zip(r[:-1], r[1:]):
                p, w = shell_rule(self.dim, r_in, r_out, n)
                pts.append(p)
                wts.append(w)
            pts = np.concatenate(pts)
            dens = np.asarray(self.density(pts), dtype=float)
            cache[n] = (pts, np.concatenate(wts) * dens)
        return cache[n]


LevyMeasure = Union[FiniteAtomic, RadialDensity]


def _checked_values(g, pts: np.ndarray) -> np.ndarray:
    vals = np.asarray(g(pts), dtype=float)
    if vals.shape != (pts.shape[0],):
        vals = np.broadcast_to(vals, (pts.shape[0],)).astype(float)
    bad = ~np.isfinite(vals)
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        raise NonFiniteIntegrand(pts[k], float(vals[k]))
    return vals


def levy_integral_with_error(nu: LevyMeasure, g) -> tuple[float, float]:
    """Integral of ``g`` against ``nu`` with an error estimate.

    Atomic measures give an exact sum (error 0).  Density measures compare
    the rule at ``n`` and ``2n`` nodes per axis and raise
    :class:`QuadratureError` if the relative change exceeds ``REFINE_RTOL``.
    """
    if isinstance(nu, FiniteAtomic):
        if nu.n_atoms == 0:
            return 0.0, 0.0
        vals = _checked_values(g, nu.locations)
        return float(vals @ nu.masses), 0.0
    p1, w1 = nu.nodes(0)
    p2, w2 = nu.nodes(1)
    i1 = float(_checked_values(g, p1) @ w1)
    i2 = float(_checked_values(g, p2) @ w2)
    err = abs(i2 - i1)
    if err > REFINE_RTOL * abs(i2) + 1e-13:
        raise QuadratureError(
            f"integral changed from {i1!r} to {i2!r} under node doubling",
            (nu.n_nodes, 2 * nu.n_nodes),
        )
    return i2, err


def levy_integral(nu: LevyMeasure, g) -> float:
    return levy_integral_with_error(nu, g)[0]


def _shell_sums(nu: RadialDensity, g, radii) -> np.ndarray:
    out = []
    for r_in, r_out in zip(radii[:-1], radii[1:]):
        p, w = shell_rule(nu.dim, r_in, r_out, nu.n_nodes)
        with np.errstate(over="ignore", invalid="ignore"):
            vals = np.abs(np.asarray(g(p), dtype=float)) * np.asarray(nu.density(p), dtype=float)
        out.append(float(vals @ w))
    return np.array(out)


def _geometric_decay(sums: np.ndarray, ratio: float = 0.75) -> bool:
    if not np.all(np.isfinite(sums)):
        return False
    tail = sums[-3:]
    if np.all(tail == 0.0):
        return True
    return bool(tail[1] <= ratio * tail[0] and tail[2] <= ratio * tail[1])


def tail_finite(nu: LevyMeasure, g, r_start: float = 1.0, n_shells: int = 6) -> tuple[bool, np.ndarray]:
    """Whether ``int_{|y| >= r_start} |g| dnu`` is finite.

    Exact for atomic measures.  For densities the integral over octave
    shells out to ``r_start * 2**n_shells`` must decay geometrically.
    """
    if isinstance(nu, FiniteAtomic):
        if nu.n_atoms == 0:
            return True, np.zeros(0)
        with np.errstate(over="ignore", invalid="ignore"):
            vals = np.abs(np.asarray(g(nu.locations), dtype=float)) * nu.masses
        return bool(np.all(np.isfinite(vals))), vals
    radii = r_start * 2.0 ** np.arange(n_shells + 1)
    sums = _shell_sums(nu, g, radii)
    return _geometric_decay(sums), sums


def origin_finite(nu: LevyMeasure, g, n_shells: int = 6) -> tuple[bool, np.ndarray]:
    """Whether ``int_{|y| < 1} |g| dnu`` is finite (decade shells toward 0)."""
    if isinstance(nu, FiniteAtomic):
        return tail_finite(nu, g)
    radii = 10.0 ** -np.arange(n_shells, -1, -1, dtype=float)
    # outermost shell first, so the decay test looks at the shells nearest 0
    sums = _shell_sums(nu, g, radii)[::-1]
    return _geometric_decay(sums), sums


def integral_finite(nu: LevyMeasure, g) -> bool:
    if isinstance(nu, FiniteAtomic):
        return tail_finite(nu, g)[0]
    return origin_finite(nu, g)[0] and tail_finite(nu, g)[0]


def exp_moment_finite(nu: LevyMeasure, i: int) -> tuple[bool, dict]:
    """Finiteness of ``int_{|y| >= 1} exp(y_i) nu(dy)``."""
    ok, shells = tail_finite(nu, lambda y: np.exp(y[:, i]) * (np.linalg.norm(y, axis=1) >= 1.0))
    return ok, {"coordinate": i, "shell_integrals": shells.tolist()}


@dataclass(frozen=True, eq=False)
class LevyTriplet:
    """Characteristic triplet ``(b, c, nu)`` relative to the truncation ``trunc``.

    Arrays are stored as given; :attr:`cov` is the symmetrised covariance
    with eigenvalues in ``[-PSD_TOL, 0)`` clamped to zero, and is what every
    computation uses.
    """

    b: np.ndarray
    c: np.ndarray
    nu: LevyMeasure = None
    trunc: Truncation = Truncation.CANONICAL

    def __post_init__(self):
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        c = np.atleast_2d(np.asarray(self.c, dtype=float))
        d = b.shape[0]
        if b.ndim != 1 or c.shape != (d, d):
            raise ValueError(f"drift has shape {b.shape} but covariance has shape {c.shape}")
        nu = self.nu if self.nu is not None else FiniteAtomic.empty(d)
        if nu.dim != d:
            raise ValueError(f"jump measure lives in R^{nu.dim}, drift in R^{d}")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "trunc", Truncation(self.trunc))

    @property
    def dim(self) -> int:
        return self.b.shape[0]

    @cached_property
    def _eig(self):
        sym = 0.5 * (self.c + self.c.T)
        lam, vec = np.linalg.eigh(sym)
        return sym, lam, vec

    @cached_property
    def cov(self) -> np.ndarray:
        sym, lam, vec = self._eig
        if lam.min(initial=0.0) < 0.0:
            return (vec * np.clip(lam, 0.0, None)) @ vec.T
        return sym

    @cached_property
    def range_basis(self) -> np.ndarray:
        _, lam, vec = self._eig
        return vec[:, lam > RANK_TOL]

    @cached_property
    def kernel_basis(self) -> np.ndarray:
        _, lam, vec = self._eig
        return vec[:, lam <= RANK_TOL]

    @cached_property
    def cov_sqrt(self) -> np.ndarray:
        """``L`` with ``L @ L.T == cov`` (eigen square root; fine for singular c)."""
        _, lam, vec = self._eig
        return vec * np.sqrt(np.clip(lam, 0.0, None))

    @property
    def rank(self) -> int:
        return self.range_basis.shape[1]

    @property
    def has_gaussian_part(self) -> bool:
        return self.rank > 0

    def h(self, y: np.ndarray) -> np.ndarray:
        return self.trunc(y)


@dataclass
class Check:
    name: str
    passed: bool
    value: object = None
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def validate_triplet(t: LevyTriplet) -> ValidationReport:
    """Check every triplet invariant and report measured values; never raises."""
    rep = ValidationReport()
    asym = float(np.max(np.abs(t.c - t.c.T), initial=0.0))
    rep.checks.append(Check("c_symmetric", asym <= SYM_TOL, asym, f"max |c - c^T| <= {SYM_TOL}"))
    lam = np.linalg.eigvalsh(0.5 * (t.c + t.c.T))
    rep.checks.append(
        Check("c_psd", bool(lam.min(initial=0.0) >= -PSD_TOL), lam.tolist(), f"eigenvalues >= -{PSD_TOL}")
    )
    rep.checks.append(Check("b_finite", bool(np.all(np.isfinite(t.b))), t.b.tolist()))
    nu = t.nu
    if isinstance(nu, FiniteAtomic):
        finite = bool(np.all(np.isfinite(nu.masses)) and np.all(np.isfinite(nu.locations)))
        rep.checks.append(Check("atoms_finite", finite))
        rep.checks.append(
            Check("masses_positive", bool(np.all(nu.masses > 0)), nu.masses.tolist(), "every mass > 0")
        )
        norms = np.linalg.norm(nu.locations, axis=1)
        rep.checks.append(
            Check("no_mass_at_origin", bool(np.all(norms > 0)), norms.tolist(), "atoms away from 0")
        )
        small = float(np.minimum(1.0, norms**2) @ nu.masses) if nu.n_atoms else 0.0
        rep.checks.append(Check("levy_integrability", finite and np.isfinite(small), small))
        rep.checks.append(Check("finite_variation", True, None, "finite activity"))
    else:
        rep.checks.append(Check("no_mass_at_origin", nu.r_min > 0, nu.r_min, "exclusion radius"))
        sq = lambda y: np.minimum(1.0, np.sum(y**2, axis=1))
        try:
            val, err = levy_integral_with_error(nu, sq)
            ok = integral_finite(nu, sq)
            rep.checks.append(Check("levy_integrability", ok, val, f"refinement change {err:.3g}"))
        except (QuadratureError, NonFiniteIntegrand) as exc:
            rep.checks.append(Check("levy_integrability", False, None, str(exc)))
        fv = lambda y: np.minimum(1.0, np.linalg.norm(y, axis=1))
        rep.checks.append(Check("finite_variation", integral_finite(nu, fv), None, "int (1 ^ |y|) dnu"))
    if t.trunc is Truncation.ZERO:
        fv_ok = rep["finite_variation"].passed
        rep.checks.append(Check("zero_truncation_allowed", fv_ok, None, "h = 0 needs finite variation"))
    return rep


def characteristic_exponent(t: LevyTriplet, u) -> complex:
    """Lévy-Khintchine exponent ``psi(u)`` with ``E exp(i<u, X_t>) = exp(t psi(u))``."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    drift = float(u @ t.b)
    gauss = -0.5 * float(u @ t.cov @ u)

    def re(y):
        return np.cos(y @ u) - 1.0

    def im(y):
        return np.sin(y @ u) - t.h(y) @ u

    jump_re = levy_integral(t.nu, re)
    jump_im = levy_integral(t.nu, im)
    return complex(gauss + jump_re, drift + jump_im)
