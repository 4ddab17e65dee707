"""Exact terminal-law simulation for finite-activity Lévy models.

Each path ``i`` draws its Gaussian part and its per-atom Poisson counts from
Philox substreams keyed by ``(seed, i)``, so batches are reproducible bit for
bit and independent of chunking.  Jump times are not stored; they are
regenerated on demand from their own substream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import rng
from .divergence import f_value
from .levy_model import FiniteAtomic, LevyTriplet
from .solver import _multiplier

CHUNK = 1 << 17


class UnsupportedMeasure(TypeError):
    pass


@dataclass(frozen=True)
class SimulationConfig:
    T: float = 1.0
    n_paths: int = 100_000
    seed: int = 0
    brownian_steps: int = 1

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"horizon T must be positive, got {self.T}")
        if self.n_paths < 1:
            raise ValueError(f"n_paths must be at least 1, got {self.n_paths}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True, eq=False)
class PathBatch:
    """Terminal samples: Gaussian part ``G ~ N(0, cT)``, jump counts per atom, ``X_T``."""

    T: float
    seed: int
    gaussian: np.ndarray  # (n, d)
    counts: np.ndarray  # (n, m) int64
    X: np.ndarray  # (n, d)
    locations: np.ndarray  # (m, d)

    @property
    def n_paths(self) -> int:
        return self.X.shape[0]

    def jump_times(self, path: int) -> list[tuple[float, int]]:
        """Sorted ``(time, atom index)`` pairs for one path, uniform given the counts."""
        counts = self.counts[path]
        total = int(counts.sum())
        if total == 0:
            return []
        u = rng.uniforms(self.seed, np.array([path]), total, rng.STREAM_JUMP_TIMES)[0]
        atoms = np.repeat(np.arange(counts.size), counts)
        order = np.argsort(u, kind="stable")
        return [(float(self.T * u[k]), int(atoms[k])) for k in order]


def _poisson_inverse(u: np.ndarray, mean: float) -> np.ndarray:
    if mean == 0.0:
        return np.zeros(u.shape, dtype=np.int64)
    kmax = int(mean + 40.0 * math.sqrt(mean) + 40)
    cdf = stats.poisson.cdf(np.arange(kmax + 1), mean)
    out = np.searchsorted(cdf, u, side="left").astype(np.int64)
    tail = out > kmax
    if tail.any():
        out[tail] = stats.poisson.ppf(u[tail], mean).astype(np.int64)
    return out


def simulate(t: LevyTriplet, cfg: SimulationConfig) -> PathBatch:
    """Sample ``X_T`` exactly: ``X_T = bT + G + sum_j N_j y_j - T sum_j lambda_j h(y_j)``."""
    nu = t.nu
    if not isinstance(nu, FiniteAtomic):
        raise UnsupportedMeasure(
            "only finite atomic jump measures can be simulated; discretise the density into atoms first"
        )
    if np.any(nu.masses <= 0):
        raise ValueError("atom masses must be positive to simulate")
    d, m, n, T = t.dim, nu.n_atoms, cfg.n_paths, float(cfg.T)
    L = t.cov_sqrt
    drift = T * (t.b - (t.h(nu.locations).T @ nu.masses if m else 0.0))
    G = np.empty((n, d))
    N = np.empty((n, m), dtype=np.int64)
    for start in range(0, n, CHUNK):
        idx = np.arange(start, min(n, start + CHUNK), dtype=np.uint64)
        xi = rng.normals(cfg.seed, idx, d, rng.STREAM_GAUSSIAN)
        G[start: start + idx.size] = math.sqrt(T) * xi @ L.T
        if m:
            u = rng.uniforms(cfg.seed, idx, m, rng.STREAM_POISSON)
            for j in range(m):
                N[start: start + idx.size, j] = _poisson_inverse(u[:, j], nu.masses[j] * T)
    X = drift + G + (N @ nu.locations if m else 0.0)
    return PathBatch(T, int(cfg.seed), G, N, X, nu.locations.copy())


def log_density_terminal(batch: PathBatch, t: LevyTriplet, params) -> np.ndarray:
    beta = params.beta
    T = batch.T
    out = batch.gaussian @ beta - 0.5 * T * float(beta @ t.cov @ beta)
    nu = t.nu
    if nu.n_atoms:
        Y = np.asarray(_multiplier(params, nu.locations), dtype=float)
        if np.any(~(Y > 0)):
            raise ValueError(f"jump multiplier must be positive at every atom, got {Y.tolist()}")
        out = out + batch.counts @ np.log(Y) - T * float((Y - 1.0) @ nu.masses)
    return out


def density_terminal(batch: PathBatch, t: LevyTriplet, params) -> np.ndarray:
    """Stochastic exponential at T: ``exp(beta'G - T beta'c beta/2) prod Y(y_j)^{N_j} exp(-T int (Y-1) dnu)``."""
    return np.exp(log_density_terminal(batch, t, params))


@dataclass(frozen=True)
class Estimate:
    mean: float
    se: float
    n: int
    n_nonfinite: int = 0

    def z_score(self, target: float) -> float:
        if self.se == 0.0:
            return 0.0 if self.mean == target else math.inf
        return (self.mean - target) / self.se

    def within(self, target: float, k: float = 4.0) -> bool:
        return abs(self.mean - target) <= k * self.se


def estimate(samples, g=None, drop_nonfinite: bool = False) -> Estimate:
    """Sample mean and standard error ``s / sqrt(n)``.

    Non-finite samples are counted; they are excluded only when
    ``drop_nonfinite`` is set, otherwise the mean comes out non-finite.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if g is not None:
        with np.errstate(over="ignore", invalid="ignore"):
            x = np.asarray(g(x), dtype=float).ravel()
    bad = ~np.isfinite(x)
    nbad = int(bad.sum())
    if drop_nonfinite and nbad:
        x = x[~bad]
    n = x.size
    if n < 2:
        raise ValueError("need at least two samples for a standard error")
    mean = float(np.sum(x) / n)
    with np.errstate(invalid="ignore"):  # inf - inf when non-finite samples are kept
        var = float(np.sum((x - mean) ** 2) / (n - 1))
    return Estimate(mean, math.sqrt(var / n), n, nbad)


@dataclass(frozen=True)
class AssetCheck:
    asset: int
    estimate: Estimate
    passed: bool
    n_overflow: int = 0


def mc_martingale_check(batch: PathBatch, t: LevyTriplet, params, z=None, k: float = 4.0) -> list[AssetCheck]:
    """``E_P[Z_T exp(X^i_T)]`` against 1 for every asset."""
    if z is None:
        z = density_terminal(batch, t, params)
    out = []
    for i in range(t.dim):
        with np.errstate(over="ignore"):
            s = np.exp(batch.X[:, i])
        n_over = int(np.sum(~np.isfinite(s)))
        est = estimate(z * s)
        out.append(AssetCheck(i, est, est.within(1.0, k), n_over))
    return out


def mc_divergence(batch: PathBatch, t: LevyTriplet, spec, params, z=None) -> Estimate:
    """Sample mean of ``f(Z_T)``."""
    if z is None:
        z = density_terminal(batch, t, params)
    if np.any(z <= 0):
        raise AssertionError("density samples must be strictly positive")
    return estimate(f_value(spec, z))


def mc_characteristic_check(batch: PathBatch, t: LevyTriplet, u, k: float = 4.0) -> dict:
    """Sample mean of ``exp(i<u, X_T>)`` against ``exp(T psi(u))``, real and imaginary parts separately."""
    from .levy_model import characteristic_exponent

    u = np.atleast_1d(np.asarray(u, dtype=float))
    phase = batch.X @ u
    target = np.exp(batch.T * characteristic_exponent(t, u))
    re = estimate(np.cos(phase))
    im = estimate(np.sin(phase))
    return {
        "u": u.tolist(),
        "target": (target.real, target.imag),
        "real": re,
        "imag": im,
        "passed": re.within(target.real, k) and im.within(target.imag, k),
    }


def poisson_count_gof(batch: PathBatch, t: LevyTriplet) -> list[float]:
    """Chi-square p-value of each atom's jump counts against Poisson(lambda T)."""
    pvals = []
    for j, lam in enumerate(t.nu.masses):
        mean = lam * batch.T
        counts = batch.counts[:, j]
        n = counts.size
        # pool the upper tail so every expected cell has at least 5 samples
        kmax = 0
        while n * stats.poisson.pmf(kmax + 1, mean) >= 5 and n * stats.poisson.sf(kmax + 1, mean) >= 5:
            kmax += 1
        observed = np.array([np.sum(counts == k) for k in range(kmax + 1)] + [np.sum(counts > kmax)])
        expected = n * np.append(stats.poisson.pmf(np.arange(kmax + 1), mean), stats.poisson.sf(kmax, mean))
        pvals.append(float(stats.chisquare(observed, expected).pvalue))
    return pvals


def dump_paths(batch: PathBatch, z, path) -> None:
    """Write one comma-separated row per path: index, G, counts, X_T, Z_T."""
    n, d = batch.X.shape
    m = batch.counts.shape[1]
    header = (
        ["path"] + [f"G{i}" for i in range(d)] + [f"N{j}" for j in range(m)]
        + [f"X{i}" for i in range(d)] + ["Z"]
    )
    z = np.full(n, np.nan) if z is None else np.asarray(z)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n):
            row = [str(i)] + [repr(float(v)) for v in batch.gaussian[i]] + [str(int(v)) for v in batch.counts[i]]
            row += [repr(float(v)) for v in batch.X[i]] + [repr(float(z[i]))]
            fh.write(",".join(row) + "\n")
