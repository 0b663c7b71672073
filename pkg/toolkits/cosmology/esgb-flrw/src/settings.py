#!/usr/bin/env python3
"""
Run Settings

Resolves every run parameter with the precedence flag > ESGB_* environment
variable > YAML config file > built-in default, and bundles the result into a
RunManifest. A .env file in the working directory is loaded first.
"""

import logging
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Union

import yaml
from dotenv import find_dotenv, load_dotenv

from envelopes import EnvelopeMode
from errors import ConfigError
from initial_data import FreeData
from integrator import IntegratorConfig

logger = logging.getLogger(__name__)

ENV_PREFIX = "ESGB_"
DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "config" / "integrator.yaml"


@dataclass
class RunDefaults:
    """Built-in run defaults, used when neither flag, env nor file sets a value."""
    beta: float = 1.0 / 3.0
    alpha: float = 0.0
    a0: float = 1.0
    s: int = 1
    t_min: float = -20.0
    t_max: float = 100.0
    mode: str = "thm21"
    grid_points: int = 400
    workers: int = 0


def parse_sign(value: Union[str, int]) -> int:
    """Accept +1, 1, -1 (also as strings)."""
    sign = int(str(value).strip())
    if sign not in (1, -1):
        raise ValueError(f"branch sign must be +1 or -1, got {value}")
    return sign


def parse_mode(value: Union[str, EnvelopeMode]) -> EnvelopeMode:
    try:
        return value if isinstance(value, EnvelopeMode) else EnvelopeMode(str(value).strip().lower())
    except ValueError:
        raise ValueError(f"mode must be one of {[m.value for m in EnvelopeMode]}, got {value}")


CASTS: Dict[str, Callable[[Any], Any]] = {
    "beta": float,
    "alpha": float,
    "a0": float,
    "s": parse_sign,
    "t_min": float,
    "t_max": float,
    "mode": parse_mode,
    "grid_points": int,
    "workers": int,
    "rtol": float,
    "atol": float,
    "output": str,
}


def load_environment(dotenv_path: Optional[str] = None) -> bool:
    """Load a .env file (default: nearest one above the working directory)."""
    path = dotenv_path or find_dotenv(usecwd=True)
    if not path:
        return False
    logger.debug(f"Loading environment from {path}")
    return load_dotenv(path, override=False)


def load_config_file(path: Optional[Union[str, Path]] = None) -> Dict[str, Dict[str, Any]]:
    """
    Read the YAML config; a missing default file yields {}.

    Raises:
        ConfigError: explicit path missing or not a mapping
    """
    explicit = path is not None
    path = Path(path) if explicit else DEFAULT_CONFIG_PATH
    if not path.exists():
        if explicit:
            raise ConfigError(f"config file not found: {path}")
        return {}
    with open(path, "r") as f:
        document = yaml.safe_load(f) or {}
    if not isinstance(document, dict):
        raise ConfigError(f"config file {path} must hold a mapping")
    return document


def env_value(name: str, environ: Optional[Mapping[str, str]] = None) -> Optional[Any]:
    """Typed value of ESGB_<NAME>, or None when unset."""
    environ = os.environ if environ is None else environ
    variable = ENV_PREFIX + name.upper()
    raw = environ.get(variable)
    if raw is None or raw == "":
        return None
    try:
        return CASTS[name](raw)
    except ValueError as exc:
        raise ConfigError(f"{variable}={raw!r}: {exc}") from exc


def resolve(name: str, flag: Optional[Any], section: Mapping[str, Any], default: Any,
            environ: Optional[Mapping[str, str]] = None) -> Any:
    """flag > env > config file section > built-in default."""
    if flag is not None:
        return CASTS[name](flag) if name in CASTS else flag
    from_env = env_value(name, environ)
    if from_env is not None:
        return from_env
    if name in section and section[name] is not None:
        try:
            return CASTS[name](section[name]) if name in CASTS else section[name]
        except ValueError as exc:
            raise ConfigError(f"config value {name}={section[name]!r}: {exc}") from exc
    return default


@dataclass
class RunManifest:
    """Everything one simulate/verify run needs."""
    data: FreeData
    cfg: IntegratorConfig
    t_min: float
    t_max: float
    mode: EnvelopeMode = EnvelopeMode.THM21
    outputs: Dict[str, Path] = field(default_factory=dict)
    grid_points: int = 400
    workers: int = 0

    def __post_init__(self):
        if self.mode is EnvelopeMode.THM12 and self.t_min != 0.0:
            logger.info(f"thm12 mode covers t >= 0 only; t_min {self.t_min:g} -> 0")
            self.t_min = 0.0
        if not self.t_min <= 0.0 <= self.t_max:
            raise ConfigError(f"need t_min <= 0 <= t_max, got [{self.t_min}, {self.t_max}]")
        if self.t_min == self.t_max:
            raise ConfigError("empty time interval: t_min = t_max = 0")
        if self.grid_points < 2:
            raise ConfigError(f"grid_points must be >= 2, got {self.grid_points}")
        if self.workers < 0:
            raise ConfigError(f"workers must be >= 0, got {self.workers}")


def build_manifest(flags: Mapping[str, Any], config_path: Optional[Union[str, Path]] = None,
                   environ: Optional[Mapping[str, str]] = None) -> RunManifest:
    """
    Build a RunManifest from parsed flags (None = not given).

    Recognised flag keys: beta, alpha, a0, s, t_min, t_max, mode, rtol, atol,
    grid_points, workers, output.
    """
    environ = os.environ if environ is None else environ
    if config_path is None and environ.get(ENV_PREFIX + "CONFIG"):
        config_path = environ[ENV_PREFIX + "CONFIG"]
    document = load_config_file(config_path)
    run_section = document.get("run") or {}
    defaults = RunDefaults()

    values = {
        item.name: resolve(item.name, flags.get(item.name), run_section, getattr(defaults, item.name), environ)
        for item in fields(RunDefaults)
    }
    integrator_section = dict(document.get("integrator") or {})
    for name in ("rtol", "atol"):
        override = resolve(name, flags.get(name), {}, None, environ)
        if override is not None:
            integrator_section[name] = override
    cfg = IntegratorConfig.from_mapping(integrator_section)

    outputs: Dict[str, Path] = {}
    output = resolve("output", flags.get("output"), {}, None, environ)
    if output is not None:
        outputs["output"] = Path(output)

    return RunManifest(
        data=FreeData(a0=values["a0"], beta=values["beta"], alpha=values["alpha"], s=values["s"]),
        cfg=cfg,
        t_min=values["t_min"],
        t_max=values["t_max"],
        mode=parse_mode(values["mode"]),
        outputs=outputs,
        grid_points=values["grid_points"],
        workers=values["workers"],
    )
