"""Convex divergence functions built from the power/log family.

A :class:`DivergenceSpec` stands for

    f(x) = sum_k A_k f_{g_k}(x) + B x + C,    A_k > 0,

where ``f_g(x) = c_g x^(g+2)`` with ``c_g = sign((g+1)/(g+2))``,
``f_{-1}(x) = x ln x`` and ``f_{-2}(x) = -ln x``.  Each building block has
``f_g''(x) = a(g) x^g`` with ``a(g) = |(g+1)(g+2)|`` (and 1 at g = -1, -2),
so every spec is strictly convex on (0, inf).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

INVERSE_RTOL = 1e-12


class DomainError(ValueError):
    pass


class RangeError(ValueError):
    """Argument outside the open range of f'."""

    def __init__(self, u, interval: tuple[float, float]):
        super().__init__(f"f'(x) = {u} has no solution; f' maps (0, inf) onto {interval}")
        self.u = u
        self.interval = interval


def a_coeff(gamma: float) -> float:
    if gamma in (-1.0, -2.0):
        return 1.0
    return abs((gamma + 1.0) * (gamma + 2.0))


def c_coeff(gamma: float) -> float:
    return math.copysign(1.0, (gamma + 1.0) / (gamma + 2.0))


@dataclass(frozen=True)
class DivergenceSpec:
    terms: tuple[tuple[float, float], ...]  # (weight A_k, exponent gamma_k)
    linear: float = 0.0
    constant: float = 0.0

    def __post_init__(self):
        terms = tuple((float(w), float(g)) for w, g in self.terms)
        if not terms:
            raise ValueError("a divergence needs at least one term")
        for w, g in terms:
            if not (w > 0 and math.isfinite(w)):
                raise ValueError(f"term weight must be positive and finite, got {w}")
            if not math.isfinite(g):
                raise ValueError(f"term exponent must be finite, got {g}")
        gammas = [g for _, g in terms]
        if len(set(gammas)) != len(gammas):
            raise ValueError(f"term exponents must be distinct, got {gammas}")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "linear", float(self.linear))
        object.__setattr__(self, "constant", float(self.constant))

    @classmethod
    def single(cls, gamma: float, weight: float = 1.0, linear: float = 0.0, constant: float = 0.0):
        return cls(((weight, gamma),), linear, constant)

    @classmethod
    def entropy(cls):
        return cls.single(-1.0)

    @classmethod
    def reverse_entropy(cls):
        return cls.single(-2.0)

    @classmethod
    def quadratic(cls):
        return cls.single(0.0)

    @classmethod
    def power(cls, gamma: float):
        return cls.single(gamma)

    @classmethod
    def from_name(cls, name: str) -> "DivergenceSpec":
        """Named shortcut: entropy, reverse_entropy, quadratic or power(gamma)."""
        name = name.strip()
        shortcuts = {"entropy": -1.0, "reverse_entropy": -2.0, "quadratic": 0.0}
        if name in shortcuts:
            return cls.single(shortcuts[name])
        m = re.fullmatch(r"power\(\s*([-+0-9.eE]+)\s*\)", name)
        if m:
            return cls.single(float(m.group(1)))
        raise ValueError(f"unknown divergence name {name!r}")

    @property
    def gammas(self) -> tuple[float, ...]:
        return tuple(g for _, g in self.terms)

    def prime_range(self) -> tuple[float, float]:
        lo = hi = self.linear
        for _, g in self.terms:
            lo += 0.0 if g > -1 else -math.inf
            hi += math.inf if g >= -1 else 0.0
        return lo, hi


def _positive(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError(f"divergence evaluated outside (0, inf): {x[~(x > 0)].ravel()[:3].tolist()}")
    return x


def _term_value(g, x):
    if g == -1.0:
        return x * np.log(x)
    if g == -2.0:
        return -np.log(x)
    return c_coeff(g) * x ** (g + 2.0)


def _term_prime(g, x):
    if g == -1.0:
        return np.log(x) + 1.0
    if g == -2.0:
        return -1.0 / x
    return c_coeff(g) * (g + 2.0) * x ** (g + 1.0)


def _ret(x, out):
    return float(out) if np.ndim(x) == 0 else out


def f_value(spec: DivergenceSpec, x):
    x = _positive(x)
    out = spec.linear * x + spec.constant
    for w, g in spec.terms:
        out = out + w * _term_value(g, x)
    return _ret(x, out)


def f_prime(spec: DivergenceSpec, x):
    x = _positive(x)
    out = spec.linear + 0.0 * x
    for w, g in spec.terms:
        out = out + w * _term_prime(g, x)
    return _ret(x, out)


def f_second(spec: DivergenceSpec, x):
    x = _positive(x)
    out = 0.0 * x
    for w, g in spec.terms:
        out = out + w * a_coeff(g) * x**g
    return _ret(x, out)


def _single_inverse(weight, g, v):
    # solves weight * f_g'(x) = v
    v = v / weight
    if g == -1.0:
        with np.errstate(over="ignore"):
            return np.exp(v - 1.0)
    if g == -2.0:
        return -1.0 / v
    return (v / (c_coeff(g) * (g + 2.0))) ** (1.0 / (g + 1.0))


def _newton_inverse(spec: DivergenceSpec, u: np.ndarray) -> np.ndarray:
    """Safeguarded Newton in s = ln x on a bracket grown by doubling."""

    def g(s):
        return f_prime(spec, np.exp(s)) - u

    lo = np.zeros_like(u)
    hi = np.zeros_like(u)
    step = 1.0
    while True:
        bad = g(lo) > 0
        if not bad.any():
            break
        lo = np.where(bad, lo - step, lo)
        step *= 2.0
        if step > 2048:
            raise RangeError(u[bad][0], spec.prime_range())
    step = 1.0
    while True:
        bad = g(hi) < 0
        if not bad.any():
            break
        hi = np.where(bad, hi + step, hi)
        step *= 2.0
        if step > 2048:
            raise RangeError(u[bad][0], spec.prime_range())
    s = 0.5 * (lo + hi)
    tol = INVERSE_RTOL * (1.0 + np.abs(u))
    for _ in range(200):
        gs = g(s)
        done = np.abs(gs) <= 0.25 * tol
        if done.all():
            break
        lo = np.where(gs < 0, s, lo)
        hi = np.where(gs > 0, s, hi)
        x = np.exp(s)
        slope = x * f_second(spec, x)
        s_new = s - gs / slope
        outside = ~((s_new > lo) & (s_new < hi))
        s_new = np.where(outside, 0.5 * (lo + hi), s_new)
        s = np.where(done, s, s_new)
        if np.all(hi - lo <= 1e-15 * np.maximum(1.0, np.abs(s))):
            break
    return np.exp(s)


def f_prime_inverse(spec: DivergenceSpec, u):
    """The unique ``x > 0`` with ``f'(x) = u``.

    Single-term specs invert in closed form; combinations use a bracketed,
    safeguarded Newton iteration.  Raises :class:`RangeError` when ``u`` lies
    outside the open range of ``f'``.
    """
    u_arr = np.asarray(u, dtype=float)
    lo, hi = spec.prime_range()
    outside = ~((u_arr > lo) & (u_arr < hi))
    if np.any(outside):
        raise RangeError(u_arr[outside].ravel()[0], (lo, hi))
    if len(spec.terms) == 1:
        (w, g), = spec.terms
        x = _single_inverse(w, g, u_arr - spec.linear)
    else:
        x = _newton_inverse(spec, np.atleast_1d(u_arr)).reshape(u_arr.shape)
    return _ret(u_arr, x)


def is_power_family(spec: DivergenceSpec) -> Optional[tuple[float, float]]:
    """``(a, gamma)`` with ``f''(x) = a x^gamma`` for single-term specs, else None."""
    if len(spec.terms) != 1:
        return None
    (w, g), = spec.terms
    return w * a_coeff(g), g


def affine_scale_decomposition(spec: DivergenceSpec, u: float) -> Optional[tuple[float, float, float]]:
    """Constants with ``f(u x) = A f(x) + B x + C`` for all x > 0.

    Defined for single-term specs; combinations of distinct exponents scale
    with distinct factors and give None.
    """
    if not u > 0:
        raise DomainError(f"scale factor must be positive, got {u}")
    if len(spec.terms) != 1:
        return None
    (w, g), = spec.terms
    b0, c0 = spec.linear, spec.constant
    if g == -1.0:
        return u, w * u * math.log(u), c0 * (1.0 - u)
    if g == -2.0:
        return 1.0, b0 * (u - 1.0), -w * math.log(u)
    A = u ** (g + 2.0)
    return A, b0 * (u - A), c0 * (1.0 - A)


@dataclass(frozen=True)
class ExtendedShapeParams:
    """``f''(x) = a x^g + x^g sum_i b_i (ln x)^i + (1/x) sum_i bt_i (ln x)^(i-1)``."""

    gamma: float
    a: float
    b: tuple[float, ...] = ()
    btilde: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"a must be positive, got {self.a}")
        if len(self.b) != len(self.btilde):
            raise ValueError("b and btilde must have the same length")


def extended_second_derivative(p: ExtendedShapeParams, x):
    x = _positive(x)
    lx = np.log(x)
    out = p.a * x**p.gamma
    for i, (bi, bti) in enumerate(zip(p.b, p.btilde), start=1):
        out = out + x**p.gamma * bi * lx**i + bti * lx ** (i - 1) / x
    return _ret(x, out)


def convexity_scan(p: ExtendedShapeParams, grid) -> bool:
    return bool(np.all(np.asarray(extended_second_derivative(p, np.asarray(grid, dtype=float))) > 0))
