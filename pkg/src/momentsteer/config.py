"""TOML run configurations.

A config is a TOML document with these keys (all others are rejected)::

    mode = "occupation"        # or "density"
    order = 2                  # n: moments m_1..m_2n are steered
    horizon = 4                # K
    master_seed = 0
    agents = 2000              # occupation mode with a density initial condition
    output = "runs/ex5"        # optional; relative to the current directory

    [coefficients]             # a(0..K-1)
    source = "uniform"         # or "explicit" with values = [...]
    lo = 0.5
    hi = 0.7
    seed = 0

    [initial]                  # a density (family + parameters) ...
    family = "gaussian"
    mu = 0.0
    sigma = 1.0
    # samples = "agents.csv"   # ... or a file of agent states (occupation mode)

    [terminal]
    family = "generalized_logistic_mixture"
    weights = [0.4, 0.6]
    locs = [1.0, -2.0]
    shapes = [2.0, 3.0]

    [constraint]               # optional; omit for controls on the real line
    interval = [-2.0, 2.0]

    [numerics]                 # optional
    nodes = 512
    tol = 1e-9
    heavy_tail = false
    history = true
"""
from __future__ import annotations

import re
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .densities import DensitySpec
from .errors import ConfigError, ParseError, ValidationError
from .system import SystemSchedule

_TOP_KEYS = {"mode", "order", "horizon", "master_seed", "agents", "output",
             "coefficients", "initial", "terminal", "constraint", "numerics"}
_COEFF_KEYS = {"source", "lo", "hi", "seed", "values"}
_NUMERIC_KEYS = {"nodes", "tol", "heavy_tail", "history"}
_FAMILY_KEYS = {
    "gaussian": {"mu", "sigma"},
    "gaussian_mixture": {"weights", "locs", "scales"},
    "laplace_mixture": {"weights", "locs", "scales"},
    "generalized_logistic_mixture": {"weights", "locs", "shapes", "scales"},
    "truncated_gaussian": {"mu", "sigma", "a", "b"},
    "uniform": {"a", "b"},
    "point_mass": {"x0"},
}
_OPTIONAL_FAMILY_KEYS = {"generalized_logistic_mixture": {"scales"}}


@dataclass(frozen=True)
class CoefficientSource:
    kind: str = "uniform"
    lo: float = 0.5
    hi: float = 0.7
    seed: int = 0
    values: tuple = ()


@dataclass(frozen=True)
class RunConfig:
    mode: str
    order: int
    horizon: int
    coefficients: CoefficientSource
    terminal: DensitySpec
    initial: DensitySpec | None = None
    initial_samples: str | None = None
    constraint: tuple | None = None
    agents: int | None = None
    master_seed: int = 0
    output: str | None = None
    nodes: int = 512
    tol: float = 1e-9
    heavy_tail: bool = False
    history: bool = True
    base_dir: str = "."

    def schedule(self):
        c = self.coefficients
        if c.kind == "explicit":
            return SystemSchedule(self.horizon, self.order, c.values)
        return SystemSchedule.uniform(self.horizon, self.order, c.lo, c.hi, c.seed)

    def load_initial_samples(self):
        path = Path(self.base_dir) / self.initial_samples
        try:
            rows = path.read_text().split()
        except OSError as exc:
            raise ConfigError(f"cannot read initial samples: {exc}") from exc
        try:
            return np.array([float(r.split(",")[0]) for r in rows if not _is_header(r)])
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc

    def with_overrides(self, **kw):
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _is_header(token):
    return bool(re.match(r"^[A-Za-z_]", token))


def _density(table, where, problems):
    if not isinstance(table, dict):
        problems.append(f"{where}: expected a table")
        return None
    fam = table.get("family")
    if fam not in _FAMILY_KEYS:
        problems.append(f"{where}.family: expected one of {sorted(_FAMILY_KEYS)}, got {fam!r}")
        return None
    need = _FAMILY_KEYS[fam] - _OPTIONAL_FAMILY_KEYS.get(fam, set())
    have = set(table) - {"family"}
    for k in sorted(have - _FAMILY_KEYS[fam]):
        problems.append(f"{where}.{k}: unknown key for family {fam}")
    for k in sorted(need - have):
        problems.append(f"{where}.{k}: missing")
    if need - have or have - _FAMILY_KEYS[fam]:
        return None
    params = {k: v for k, v in table.items() if k != "family"}
    try:
        if fam == "truncated_gaussian":
            return DensitySpec.truncated_gaussian(**params)
        if fam == "uniform":
            return DensitySpec.uniform(**params)
        if fam == "generalized_logistic_mixture":
            return DensitySpec.generalized_logistic_mixture(**params)
        return DensitySpec(fam, params)
    except (TypeError, ValueError, KeyError) as exc:
        problems.append(f"{where}: {exc}")
        return None


def _int(doc, key, problems, minimum=None, required=True):
    if key not in doc:
        if required:
            problems.append(f"{key}: missing")
        return None
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int):
        problems.append(f"{key}: expected an integer, got {v!r}")
        return None
    if minimum is not None and v < minimum:
        problems.append(f"{key}: must be >= {minimum}, got {v}")
        return None
    return v


def _coefficients(table, horizon, problems):
    if not isinstance(table, dict):
        problems.append("coefficients: expected a table")
        return None
    for k in sorted(set(table) - _COEFF_KEYS):
        problems.append(f"coefficients.{k}: unknown key")
    kind = table.get("source", "uniform")
    if kind == "explicit":
        values = table.get("values")
        if not isinstance(values, list) or not values:
            problems.append("coefficients.values: expected a non-empty list")
            return None
        if horizon is not None and len(values) != horizon:
            problems.append(f"coefficients.values: expected {horizon} values, got {len(values)}")
        return CoefficientSource("explicit", values=tuple(float(v) for v in values))
    if kind != "uniform":
        problems.append(f"coefficients.source: expected 'uniform' or 'explicit', got {kind!r}")
        return None
    lo, hi = float(table.get("lo", 0.5)), float(table.get("hi", 0.7))
    if not lo < hi:
        problems.append(f"coefficients: need lo < hi, got lo={lo}, hi={hi}")
    return CoefficientSource("uniform", lo, hi, int(table.get("seed", 0)))


def parse_config(text, base_dir="."):
    """Parse and validate a TOML run config.

    Raises
    ------
    ParseError
        Malformed TOML, with the offending line.
    ValidationError
        Listing every problem found in a well-formed document.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ParseError(str(exc), line=int(m.group(1)) if m else None) from exc

    problems = [f"{k}: unknown key" for k in sorted(set(doc) - _TOP_KEYS)]
    mode = doc.get("mode")
    if mode not in ("density", "occupation"):
        problems.append(f"mode: expected 'density' or 'occupation', got {mode!r}")
    order = _int(doc, "order", problems, 1)
    horizon = _int(doc, "horizon", problems, 1)
    seed = _int(doc, "master_seed", problems, 0, required=False)
    agents = _int(doc, "agents", problems, 1, required=False)
    output = doc.get("output")
    if output is not None and not isinstance(output, str):
        problems.append("output: expected a string")
    coeffs = _coefficients(doc.get("coefficients", {}), horizon, problems)

    terminal = None
    if "terminal" not in doc:
        problems.append("terminal: missing")
    else:
        terminal = _density(doc["terminal"], "terminal", problems)

    initial, samples = None, None
    init = doc.get("initial")
    if init is None:
        problems.append("initial: missing")
    elif isinstance(init, dict) and "samples" in init:
        samples = init["samples"]
        if set(init) != {"samples"}:
            problems.append("initial: give either samples or a density, not both")
        if mode == "density":
            problems.append("initial.samples: only valid in occupation mode")
    else:
        initial = _density(init, "initial", problems)
    if mode == "occupation" and samples is None and agents is None:
        problems.append("agents: required in occupation mode with a density initial condition")

    constraint = None
    if "constraint" in doc:
        c = doc["constraint"]
        iv = c.get("interval") if isinstance(c, dict) else None
        if isinstance(c, dict):
            for k in sorted(set(c) - {"interval"}):
                problems.append(f"constraint.{k}: unknown key")
        if not (isinstance(iv, list) and len(iv) == 2):
            problems.append("constraint.interval: expected [a, b]")
        elif not float(iv[0]) < float(iv[1]):
            problems.append(f"constraint.interval: need a < b, got {iv}")
        else:
            constraint = (float(iv[0]), float(iv[1]))

    num = doc.get("numerics", {})
    for k in sorted(set(num) - _NUMERIC_KEYS):
        problems.append(f"numerics.{k}: unknown key")
    nodes = _int(num, "nodes", problems, 64, required=False)
    tol = float(num.get("tol", 1e-9))
    if not tol > 0:
        problems.append("numerics.tol: must be positive")

    if problems:
        raise ValidationError(problems)
    return RunConfig(
        mode=mode, order=order, horizon=horizon, coefficients=coeffs, terminal=terminal,
        initial=initial, initial_samples=samples, constraint=constraint, agents=agents,
        master_seed=0 if seed is None else seed, output=output,
        nodes=512 if nodes is None else nodes, tol=tol,
        heavy_tail=bool(num.get("heavy_tail", False)), history=bool(num.get("history", True)),
        base_dir=str(base_dir),
    )


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return parse_config(text, base_dir=path.parent)
