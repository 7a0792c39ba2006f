"""Run configuration: seed, workers, Monte Carlo sizes and tolerances.

Config files are INI-style with sections ``[spec]``, ``[run]`` and
``[tolerances]``::

    [spec]
    kind = cauchy
    scale = 1

    [run]
    seed = 7
    workers = 2
    n_paths = 1000000

    [tolerances]
    monte_carlo = 0.05

Command-line flags override file values.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace
from typing import Dict, Mapping, Optional

from .entrance import DEFAULT_CONFIG, EntranceConfig
from .processes import ProcessSpec, spec_from_dict
from .sampling import resolve_seed
from .verify import DEFAULT_TOLERANCES

FORMATS = ("csv", "json")
_ENTRANCE_KEYS = {f.name: f.type for f in fields(EntranceConfig)}
_TUPLE_KEYS = ("x0", "killed_eps")


class ConfigError(ValueError):
    """Malformed configuration file or value."""


@dataclass
class RunConfig:
    """Everything that determines the output of a command.

    Attributes
    ----------
    seed : int or None
        ``None`` falls back to ``$LEVYSUP_SEED`` and then to the default seed.
    workers : int
        Threads for batch-parallel Monte Carlo; results do not depend on it.
    output_format : {"csv", "json"}
    tolerances : dict
        ``closed_form`` and ``monte_carlo`` relative tolerances.
    entrance : EntranceConfig
    oracle_n, oracle_steps : int
        Path count and mesh of the supremum oracle.
    spec : dict
        Raw ``[spec]`` entries; see :func:`levysup.processes.spec_from_dict`.
    """

    seed: Optional[int] = None
    workers: int = 1
    output_format: str = "csv"
    tolerances: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    entrance: EntranceConfig = DEFAULT_CONFIG
    oracle_n: int = 1_000_000
    oracle_steps: int = 512
    spec: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.output_format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.output_format!r}")

    @property
    def resolved_seed(self) -> int:
        return resolve_seed(self.seed)

    def process(self) -> ProcessSpec:
        if not self.spec:
            raise ConfigError("no process given (use --spec or a [spec] section)")
        try:
            return spec_from_dict(self.spec)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid [spec]: {exc}") from exc


def _entrance_from(section: Mapping[str, str], base: EntranceConfig) -> EntranceConfig:
    kw = {}
    for key, raw in section.items():
        if key not in _ENTRANCE_KEYS:
            continue
        try:
            if key in _TUPLE_KEYS:
                kw[key] = tuple(float(v) for v in raw.split(","))
            elif key == "richardson":
                kw[key] = raw.strip().lower() in ("1", "true", "yes", "on")
            elif key in ("eps", "grid_lo", "grid_hi", "bw_factor", "bias_sigmas"):
                kw[key] = float(raw)
            else:
                kw[key] = int(float(raw))
        except ValueError as exc:
            raise ConfigError(f"[run] {key}: cannot parse {raw!r}") from exc
    return replace(base, **kw)


def load_config(path: Optional[str] = None, base: Optional[RunConfig] = None) -> RunConfig:
    """Read an INI file into a :class:`RunConfig` (missing file is an error)."""
    cfg = base or RunConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path!r}: {exc}") from exc
    unknown = set(parser.sections()) - {"spec", "run", "tolerances"}
    if unknown:
        raise ConfigError(f"unknown config section(s): {', '.join(sorted(unknown))}")
    spec = dict(parser["spec"]) if parser.has_section("spec") else dict(cfg.spec)
    run = dict(parser["run"]) if parser.has_section("run") else {}
    tol = dict(cfg.tolerances)
    if parser.has_section("tolerances"):
        for k, v in parser["tolerances"].items():
            try:
                tol[k] = float(v)
            except ValueError as exc:
                raise ConfigError(f"[tolerances] {k}: cannot parse {v!r}") from exc
    try:
        seed = int(run["seed"]) if "seed" in run else cfg.seed
        workers = int(run.get("workers", cfg.workers))
        oracle_n = int(float(run.get("oracle_n", cfg.oracle_n)))
        oracle_steps = int(run.get("oracle_steps", cfg.oracle_steps))
    except ValueError as exc:
        raise ConfigError(f"[run]: {exc}") from exc
    return RunConfig(seed=seed, workers=workers,
                     output_format=run.get("format", cfg.output_format),
                     tolerances=tol, entrance=_entrance_from(run, cfg.entrance),
                     oracle_n=oracle_n, oracle_steps=oracle_steps, spec=spec)
