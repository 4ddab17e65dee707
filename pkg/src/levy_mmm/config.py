"""JSON run configuration.

Layout (every block except ``model`` is optional)::

    {
      "schema_version": 1,
      "model": {
        "b": [..d..],
        "c": [[..], ..] or flat row-major list of d*d numbers,
        "truncation": "canonical" | "zero",
        "nu": {"type": "atomic", "atoms": [{"y": [..d..], "mass": m}, ..]}
            | {"type": "radial", "family": "gaussian" | "tempered_stable", ...}
      },
      "divergence": "entropy" | "power(-3)" | {"terms": [{"weight": A, "gamma": g}], "linear": B, "constant": C},
      "solver": {"tol": .., "max_iter": .., "max_restarts": .., "fd_step": .., "y_floor": .., "x_grid": [..],
                 "fix_kernel_zero": false},
      "simulation": {"T": 1.0, "n_paths": 100000, "seed": 0, "brownian_steps": 1},
      "checks": {"existence": true, "fundamental": true, "support": true, "minimality": true,
                 "scale": true, "time": true, "montecarlo": true}
    }
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .divergence import DivergenceSpec
from .levy_model import FiniteAtomic, LevyTriplet, RadialDensity, Truncation
from .montecarlo import SimulationConfig
from .solver import SolverConfig

SCHEMA_VERSION = 1
CHECK_NAMES = ("existence", "fundamental", "support", "minimality", "scale", "time", "montecarlo")


class ConfigError(ValueError):
    """Invalid configuration; ``where`` names the field or the line:column."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where
        self.message = message


@dataclass
class RunConfig:
    model: LevyTriplet
    divergence: DivergenceSpec
    solver: SolverConfig = field(default_factory=SolverConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    checks: dict = field(default_factory=lambda: {k: True for k in CHECK_NAMES})
    raw: dict = field(default_factory=dict)

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON of the effective configuration."""
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"), allow_nan=False)
        return hashlib.sha256(blob.encode()).hexdigest()


def _reject_constant(name):
    raise ValueError(f"non-finite literal {name} is not allowed")


def _number(x, where) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(where, f"expected a number, got {x!r}")
    if not math.isfinite(x):
        raise ConfigError(where, "must be finite")
    return float(x)


def _vector(x, where, length=None) -> np.ndarray:
    if not isinstance(x, list):
        raise ConfigError(where, f"expected a list of numbers, got {type(x).__name__}")
    v = np.array([_number(e, f"{where}[{i}]") for i, e in enumerate(x)])
    if length is not None and v.size != length:
        raise ConfigError(where, f"expected {length} entries, got {v.size}")
    return v


def _matrix(x, where, d) -> np.ndarray:
    if not isinstance(x, list):
        raise ConfigError(where, "expected a list")
    if x and all(isinstance(r, list) for r in x):
        if len(x) != d:
            raise ConfigError(where, f"expected {d} rows, got {len(x)}")
        return np.vstack([_vector(r, f"{where}[{i}]", d) for i, r in enumerate(x)])
    if any(isinstance(r, list) for r in x):
        raise ConfigError(where, "mixes nested rows and bare numbers")
    return _vector(x, where, d * d).reshape(d, d)


def _keys(block, where, allowed):
    if not isinstance(block, dict):
        raise ConfigError(where, f"expected an object, got {type(block).__name__}")
    extra = sorted(set(block) - set(allowed))
    if extra:
        raise ConfigError(where, f"unknown field(s) {extra}")


def _radial(nu: dict, d: int) -> RadialDensity:
    _keys(nu, "model.nu", ("type", "family", "intensity", "scale", "C", "G", "alpha", "r_min", "r_max", "n_nodes"))
    fam = nu.get("family")
    opts = {k: _number(nu[k], f"model.nu.{k}") for k in ("r_min", "r_max") if k in nu}
    if "n_nodes" in nu:
        opts["n_nodes"] = int(_number(nu["n_nodes"], "model.nu.n_nodes"))
    if fam == "gaussian":
        lam = _number(nu.get("intensity", 1.0), "model.nu.intensity")
        s = _number(nu.get("scale", 1.0), "model.nu.scale")
        norm = lam / (2.0 * math.pi * s * s) ** (d / 2.0)

        def density(y):
            return norm * np.exp(-0.5 * np.sum(y * y, axis=1) / (s * s))

        return RadialDensity(density, dim=d, label=f"gaussian(intensity={lam:g}, scale={s:g})", **opts)
    if fam == "tempered_stable":
        C = _number(nu.get("C", 1.0), "model.nu.C")
        G = _number(nu.get("G", 5.0), "model.nu.G")
        al = _number(nu.get("alpha", 0.5), "model.nu.alpha")
        if not (C > 0 and G > 0 and 0 <= al < 2):
            raise ConfigError("model.nu", "tempered_stable needs C > 0, G > 0 and 0 <= alpha < 2")

        def density(y):
            r = np.linalg.norm(y, axis=1)
            return C * np.exp(-G * r) / r ** (d + al)

        return RadialDensity(density, dim=d, label=f"tempered_stable(C={C:g}, G={G:g}, alpha={al:g})", **opts)
    raise ConfigError("model.nu.family", f"unknown family {fam!r}; use 'gaussian' or 'tempered_stable'")


def parse_model(m) -> LevyTriplet:
    _keys(m, "model", ("b", "c", "truncation", "nu"))
    if "b" not in m:
        raise ConfigError("model.b", "missing")
    b = _vector(m["b"], "model.b")
    d = b.size
    if d == 0:
        raise ConfigError("model.b", "dimension must be at least 1")
    c = _matrix(m.get("c", [0.0] * (d * d)), "model.c", d)
    try:
        trunc = Truncation(m.get("truncation", "canonical"))
    except ValueError:
        raise ConfigError("model.truncation", f"expected 'canonical' or 'zero', got {m.get('truncation')!r}") from None
    nu_cfg = m.get("nu", {"type": "atomic", "atoms": []})
    if not isinstance(nu_cfg, dict):
        raise ConfigError("model.nu", "expected an object")
    kind = nu_cfg.get("type", "atomic")
    if kind == "atomic":
        _keys(nu_cfg, "model.nu", ("type", "atoms"))
        atoms = nu_cfg.get("atoms", [])
        if not isinstance(atoms, list):
            raise ConfigError("model.nu.atoms", "expected a list")
        locs, masses = [], []
        for j, a in enumerate(atoms):
            _keys(a, f"model.nu.atoms[{j}]", ("y", "mass"))
            locs.append(_vector(a.get("y"), f"model.nu.atoms[{j}].y", d))
            masses.append(_number(a.get("mass"), f"model.nu.atoms[{j}].mass"))
        nu = FiniteAtomic(np.array(locs).reshape(-1, d), np.array(masses)) if locs else FiniteAtomic.empty(d)
    elif kind == "radial":
        nu = _radial(nu_cfg, d)
    else:
        raise ConfigError("model.nu.type", f"expected 'atomic' or 'radial', got {kind!r}")
    return LevyTriplet(b, c, nu, trunc)


def parse_divergence(x) -> DivergenceSpec:
    if isinstance(x, str):
        try:
            return DivergenceSpec.from_name(x)
        except ValueError as exc:
            raise ConfigError("divergence", str(exc)) from None
    _keys(x, "divergence", ("terms", "linear", "constant"))
    terms = x.get("terms")
    if not isinstance(terms, list) or not terms:
        raise ConfigError("divergence.terms", "expected a non-empty list")
    parsed = []
    for k, term in enumerate(terms):
        _keys(term, f"divergence.terms[{k}]", ("weight", "gamma"))
        parsed.append((_number(term.get("weight", 1.0), f"divergence.terms[{k}].weight"),
                       _number(term.get("gamma"), f"divergence.terms[{k}].gamma")))
    try:
        return DivergenceSpec(tuple(parsed), _number(x.get("linear", 0.0), "divergence.linear"),
                              _number(x.get("constant", 0.0), "divergence.constant"))
    except ValueError as exc:
        raise ConfigError("divergence", str(exc)) from None


def _dataclass_block(cls, block, where):
    names = {f.name: f for f in fields(cls)}
    _keys(block, where, names)
    out = {}
    for k, v in block.items():
        default = names[k].default
        if isinstance(default, bool):
            if not isinstance(v, bool):
                raise ConfigError(f"{where}.{k}", "expected true or false")
            out[k] = v
        elif isinstance(default, int):
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise ConfigError(f"{where}.{k}", f"expected a non-negative integer, got {v!r}")
            out[k] = v
        elif isinstance(default, tuple):
            out[k] = tuple(_vector(v, f"{where}.{k}").tolist())
        else:
            out[k] = _number(v, f"{where}.{k}")
    try:
        return cls(**out)
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from None


def parse_config(data: dict, seed=None, paths=None) -> RunConfig:
    """Build a :class:`RunConfig` from decoded JSON; ``seed``/``paths`` override the simulation block."""
    _keys(data, "config", ("schema_version", "model", "divergence", "solver", "simulation", "checks"))
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"expected {SCHEMA_VERSION}, got {version!r}")
    if "model" not in data:
        raise ConfigError("model", "missing")
    raw = json.loads(json.dumps(data))
    sim_block = dict(data.get("simulation", {}))
    if seed is not None:
        sim_block["seed"] = int(seed)
    if paths is not None:
        sim_block["n_paths"] = int(paths)
    raw["simulation"] = sim_block
    checks = dict.fromkeys(CHECK_NAMES, True)
    cb = data.get("checks", {})
    _keys(cb, "checks", CHECK_NAMES)
    for k, v in cb.items():
        if not isinstance(v, bool):
            raise ConfigError(f"checks.{k}", "expected true or false")
        checks[k] = v
    try:
        model = parse_model(data["model"])
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("model", str(exc)) from None
    return RunConfig(
        model=model,
        divergence=parse_divergence(data.get("divergence", "entropy")),
        solver=_dataclass_block(SolverConfig, data.get("solver", {}), "solver"),
        simulation=_dataclass_block(SimulationConfig, sim_block, "simulation"),
        checks=checks,
        raw=raw,
    )


def load_config(path, seed=None, paths=None) -> RunConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from None
    except ValueError as exc:
        raise ConfigError("config", str(exc)) from None
    return parse_config(data, seed, paths)
