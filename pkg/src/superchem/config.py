"""Run configuration: presets, ``key = value`` files and flag overrides."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ensemble import EnsembleConfig
from .integrator import IntegratorConfig
from .model import SPECIES, ModelParams, PulseShape, Statistics, collision_matrix


class ConfigError(ValueError):
    def __init__(self, message, keys=()):
        super().__init__(message)
        self.keys = tuple(keys)


class MissingKey(ConfigError):
    pass


class UnknownKey(ConfigError):
    pass


class OutOfRange(ConfigError):
    pass


def _float(text):
    return float(text)


def _int(text):
    if isinstance(text, (int, np.integer)):
        return int(text)
    try:
        return int(str(text).strip())
    except ValueError:
        pass
    value = float(text)  # accepts "1e5"
    if not value.is_integer():
        raise ValueError(f"{text!r} is not an integer")
    return int(value)


def _choice(enum_cls):
    def parse(text):
        if isinstance(text, enum_cls):
            return text.value
        return enum_cls(str(text).strip().lower()).value
    parse.__name__ = enum_cls.__name__
    return parse


def _float_list(text):
    if isinstance(text, str):
        return tuple(float(v) for v in text.replace(",", " ").split())
    return tuple(float(v) for v in np.atleast_1d(text))


_finite = (math.isfinite, "finite")
_positive = (lambda v: math.isfinite(v) and v > 0, "> 0")
_nonneg = (lambda v: math.isfinite(v) and v >= 0, ">= 0")
_anything = (lambda v: True, "any")


# key -> (parser, (check, constraint), help)
KEYS = {
    "delta": (_float, _finite, "one-photon detuning, units of lambda"),
    "Delta": (_float, _finite, "second detuning (default -delta: two-photon resonance)"),
    "gamma": (_float, _nonneg, "trimer decay rate"),
    "omega0": (_float, _nonneg, "peak Rabi rate"),
    "tau": (_float, _positive, "pulse width, units of 1/lambda"),
    "t0": (_float, _finite, "pulse centre"),
    "pulse": (_choice(PulseShape), _anything, "sech or constant"),
    "lam": (_float, _positive, "reduced atom-dimer coupling (1 in reduced units)"),
    "lambda_si": (_float, _positive, "physical coupling rate, s^-1"),
    "statistics": (_choice(Statistics), _anything, "boson or bose_fermi"),
    "kinetic_ab": (_float, _positive, "degeneracy coefficient A_ab (bose_fermi)"),
    "kinetic_b": (_float, _positive, "degeneracy coefficient A_b (bose_fermi)"),
    "n_total": (_float, (lambda v: v >= 1, ">= 1"), "total particle number"),
    "chi_aa": (_float, _finite, "A-A collision rate"),
    "chi_bb": (_float, _finite, "B-B collision rate"),
    "chi_ab": (_float, _finite, "A-B collision rate"),
    "chi_other": (_float, _finite, "every remaining collision pair"),
    "R": (_float, _positive, "initial ratio N_a / (2 N_b2)"),
    "n_traj": (_int, (lambda v: v >= 2, ">= 2"), "number of trajectories"),
    "master_seed": (_int, (lambda v: 0 <= v < 2 ** 64, "in [0, 2^64)"), "ensemble RNG seed"),
    "seed_variance": (_float, _positive, "E|seed|^2 per product mode (default 1/(2 n_total))"),
    "rel_tol": (_float, (lambda v: 0 < v <= 1e-3, "in (0, 1e-3]"), "relative tolerance"),
    "abs_tol": (_float, (lambda v: 0 < v <= 1e-3, "in (0, 1e-3]"), "absolute tolerance"),
    "t_end": (_float, _positive, "final time, units of 1/lambda"),
    "report_points": (_int, (lambda v: v >= 2, ">= 2"), "output grid size"),
    "max_step": (_float, _nonneg, "largest step (0 = unbounded)"),
    "deltas": (_float_list, (lambda v: len(v) > 0, "non-empty"), "detuning sweep for ensemble"),
    "workers": (_int, (lambda v: v >= 1, ">= 1"), "worker threads"),
}
for _i, _a in enumerate(SPECIES):
    for _b in SPECIES[_i:]:
        KEYS[f"chi_{_a}_{_b}"] = (_float, _finite, f"{_a}-{_b} collision rate")

REQUIRED = ("delta", "gamma", "omega0", "tau", "R", "n_total")

_PAPER_BASE = {
    "delta": 3.0, "gamma": 1.0, "omega0": 20.0, "tau": 20.0, "t0": 0.0,
    "chi_aa": 0.5303, "chi_bb": 0.3214, "chi_ab": 0.8731, "chi_other": 0.0938,
    "R": 0.5, "n_traj": 300, "n_total": 1e5, "t_end": 100.0, "report_points": 1001,
    "statistics": "boson",
}

PRESETS = {
    "fig2": dict(_PAPER_BASE, deltas=(3.0, -3.0)),
    "fig3a": dict(_PAPER_BASE),
    # kinetic_ab / kinetic_b must come from the user
    "fig3b": dict(_PAPER_BASE, statistics="bose_fermi"),
}

PRESET_NOTES = {
    "fig2": "population standard deviations, bosonic, delta = +3 and -3",
    "fig3a": "mean populations, bosonic Rb-K, delta = 3",
    "fig3b": "mean populations, bose-fermi Rb-K; set kinetic_ab and kinetic_b",
}


@dataclass
class RunConfig:
    values: dict
    preset: str | None = None
    overrides: dict = field(default_factory=dict)

    def get(self, key, default=None):
        return self.values.get(key, default)

    @property
    def model(self):
        v = self.values
        pairs = {k[4:]: v[k] for k in v if k.startswith("chi_") and k.count("_") == 2}
        chi = collision_matrix(
            aa=v.get("chi_aa", 0.5303), bb=v.get("chi_bb", 0.3214),
            ab=v.get("chi_ab", 0.8731), other=v.get("chi_other", 0.0938), **pairs)
        kinetic = None
        if v.get("statistics", "boson") == Statistics.BOSE_FERMI.value:
            kinetic = (v["kinetic_ab"], v["kinetic_b"])
        optional = {k: v[k] for k in ("Delta", "t0", "lam", "lambda_si", "pulse") if k in v}
        return ModelParams(delta=v["delta"], gamma=v["gamma"], omega0=v["omega0"],
                           tau=v["tau"], chi=chi, statistics=v.get("statistics", "boson"),
                           kinetic_coeff=kinetic, n_total=v["n_total"], **optional)

    @property
    def integrator(self):
        names = ("rel_tol", "abs_tol", "t_end", "report_points", "max_step")
        return IntegratorConfig(**{k: self.values[k] for k in names if k in self.values})

    def ensemble(self, master_seed=None, **model_changes):
        seed = self.values.get("master_seed") if master_seed is None else master_seed
        model = self.model
        if model_changes:
            model = model.replace(**model_changes)
        return EnsembleConfig(params=model, n_traj=self.values.get("n_traj", 300),
                              master_seed=0 if seed is None else seed,
                              seed_variance=self.values.get("seed_variance"),
                              R=self.values["R"], integrator=self.integrator)

    def to_text(self):
        return "".join(f"{k} = {_format(v)}\n" for k, v in self.values.items())


def _format(value):
    if isinstance(value, tuple):
        return ", ".join(repr(x) for x in value)
    return repr(value) if isinstance(value, float) else str(value)


def read_config_text(text, source="<config>"):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}", [key])
        raw[key] = value
    return raw


def parse_config(file=None, flags=None, preset=None):
    """Merge preset, config file and flag overrides (in that order) and validate.

    ``flags`` maps keys to raw strings or already-typed values. Every key is
    checked against :data:`KEYS`; model-level consistency is checked by
    building the parameter objects once.
    """
    flags = dict(flags or {})
    file_values = {}
    if file is not None:
        path = Path(file)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        file_values = read_config_text(text, str(path))
    preset = flags.pop("preset", None) or preset or file_values.pop("preset", None)
    file_values.pop("preset", None)

    unknown = sorted(k for k in list(file_values) + list(flags) if k not in KEYS)
    if unknown:
        raise UnknownKey("unknown key(s): " + ", ".join(unknown), unknown)

    values = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}",
                              ["preset"])
        values.update(PRESETS[preset])
    overrides = {}
    for source in (file_values, flags):
        for key, raw in source.items():
            values[key] = overrides[key] = _convert(key, raw)

    missing = [k for k in REQUIRED if k not in values]
    if values.get("statistics") == Statistics.BOSE_FERMI.value:
        missing += [k for k in ("kinetic_ab", "kinetic_b") if k not in values]
    if missing:
        raise MissingKey("missing required key(s): " + ", ".join(missing), missing)

    cfg = RunConfig(values=values, preset=preset, overrides=overrides)
    try:
        cfg.ensemble()
    except ValueError as exc:
        raise OutOfRange(f"inconsistent configuration: {exc}") from exc
    return cfg


def _convert(key, raw):
    parse, (check, constraint), _ = KEYS[key]
    try:
        value = parse(raw)
    except (TypeError, ValueError) as exc:
        raise OutOfRange(f"{key}: cannot parse {raw!r} ({exc})", [key]) from exc
    if not check(value):
        raise OutOfRange(f"{key} = {value!r} violates constraint {constraint}", [key])
    return value
