"""Experiment configuration: a flat ``key = value`` text format.

Lines starting with ``#`` are comments; vectors are comma separated. Keys
(defaults in parentheses)::

    scenario          sparse | bpsk | custom          (sparse)
    M, N              problem dimensions              (8, 10)
    snr_grid_db       comma list of SNR levels in dB  (0, 5, ..., 50)
    instances_per_snr instances per SNR level         (500)
    strategies        comma list; "lmmse" allowed     (all strategies + lmmse)
    master_seed       unsigned 64-bit integer         (0)
    max_sweeps        sweep cap per run               (200)
    tol               convergence tolerance           (1e-8)
    output_path       output directory                (results)
    svg               write nmse.svg (true/false)     (true)
    prior_weights, prior_means, prior_vars
                      one mixture shared by all symbols; custom scenario only
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from importlib import resources
from pathlib import Path
from typing import List, Optional

from ..errors import ConfigError, InvalidParameterError
from ..priors import MixturePrior
from ..strategies import STRATEGY_NAMES

BASELINES = ("lmmse",)
SCENARIOS = ("sparse", "bpsk", "custom")
DEFAULT_STRATEGIES = tuple(STRATEGY_NAMES) + BASELINES


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = "sparse"
    M: int = 8
    N: int = 10
    snr_grid_db: tuple = tuple(float(5 * i) for i in range(11))
    instances_per_snr: int = 500
    strategies: tuple = DEFAULT_STRATEGIES
    master_seed: int = 0
    max_sweeps: int = 200
    tol: float = 1e-8
    output_path: str = "results"
    svg: bool = True
    prior_weights: Optional[tuple] = None
    prior_means: Optional[tuple] = None
    prior_vars: Optional[tuple] = None

    def __post_init__(self):
        validate(self)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def priors(self) -> List[MixturePrior]:
        if self.scenario == "sparse":
            return [MixturePrior.sparse(n + 1) for n in range(self.N)]
        if self.scenario == "bpsk":
            return [MixturePrior.bpsk()] * self.N
        return [MixturePrior(self.prior_weights, self.prior_means, self.prior_vars)] * self.N


def validate(cfg: ExperimentConfig) -> None:
    if cfg.scenario not in SCENARIOS:
        raise ConfigError("scenario", f"unknown scenario {cfg.scenario!r}; expected one of {', '.join(SCENARIOS)}")
    for name in ("M", "N", "instances_per_snr", "max_sweeps"):
        if getattr(cfg, name) < 1:
            raise ConfigError(name, "must be >= 1")
    if not cfg.snr_grid_db:
        raise ConfigError("snr_grid_db", "must not be empty")
    if not all(math.isfinite(s) for s in cfg.snr_grid_db):
        raise ConfigError("snr_grid_db", "entries must be finite")
    if not cfg.strategies:
        raise ConfigError("strategies", "must not be empty")
    for s in cfg.strategies:
        if s not in DEFAULT_STRATEGIES:
            raise ConfigError("strategies", f"unknown strategy {s!r}")
    if len(set(cfg.strategies)) != len(cfg.strategies):
        raise ConfigError("strategies", "duplicate entries")
    if not 0 <= cfg.master_seed < 2**64:
        raise ConfigError("master_seed", "must be an unsigned 64-bit integer")
    if not (cfg.tol > 0 and math.isfinite(cfg.tol)):
        raise ConfigError("tol", "must be positive and finite")
    custom = (cfg.prior_weights, cfg.prior_means, cfg.prior_vars)
    if cfg.scenario == "custom":
        for name, v in zip(("prior_weights", "prior_means", "prior_vars"), custom):
            if v is None:
                raise ConfigError(name, "required for the custom scenario")
        try:
            MixturePrior(*custom)
        except InvalidParameterError as e:
            raise ConfigError("prior_weights", f"invalid custom prior: {e}") from None
    elif any(v is not None for v in custom):
        raise ConfigError("scenario", "prior_* keys are only allowed with scenario = custom")


def _floats(text):
    return tuple(float(t) for t in text.split(",") if t.strip())


def _names(text):
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


PARSERS = {
    "scenario": str.strip,
    "M": int,
    "N": int,
    "snr_grid_db": _floats,
    "instances_per_snr": int,
    "strategies": _names,
    "master_seed": int,
    "max_sweeps": int,
    "tol": float,
    "output_path": str.strip,
    "svg": _bool,
    "prior_weights": _floats,
    "prior_means": _floats,
    "prior_vars": _floats,
}
assert set(PARSERS) == {f.name for f in fields(ExperimentConfig)}


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(None, f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in PARSERS:
            raise ConfigError(key, f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(key, f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = PARSERS[key](value)
        except ValueError as e:
            raise ConfigError(key, f"{source}:{lineno}: bad value for {key!r}: {e}") from None
    return ExperimentConfig(**values)


def preset_path(name: str) -> Optional[Path]:
    """Path of a bundled preset such as ``sparse.cfg``, or None."""
    res = resources.files("revamp.presets").joinpath(name)
    return Path(str(res)) if res.is_file() else None


def load_config(path) -> ExperimentConfig:
    """Read a config file. A bare name like ``sparse.cfg`` that does not exist
    locally falls back to the bundled preset of that name."""
    p = Path(path)
    if not p.is_file() and p.name == str(path):
        p = preset_path(p.name) or p
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(None, f"cannot read config file {str(path)!r}: {e.strerror or e}") from None
    return parse_config(text, str(path))
