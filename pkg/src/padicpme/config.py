"""Experiment configuration: TOML in, validated dataclass out."""

import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .grid import ConfigError

__all__ = ["ExperimentConfig", "load_config", "DEFAULT_CONFIG"]


@dataclass
class ExperimentConfig:
    p: int = 2
    N: int = 1
    K: int = 3
    alpha: float = 0.5
    m: float = 2.0
    tau: float = 0.1
    T: float = 1.0
    seed: int = 0
    initial: str = "psi0"
    out: str = "."
    prox_tol: float = 1e-10
    newton_tol: float = 1e-13
    mu_min: float = 1e-12
    max_newton: int = 60
    suites: list[str] | None = None

    def __post_init__(self) -> None:
        checks = [
            ("alpha", self.alpha > 0),
            ("m", self.m > 0),
            ("tau", self.tau > 0),
            ("T", self.T > 0),
            ("prox_tol", self.prox_tol > 0),
            ("newton_tol", self.newton_tol > 0),
            ("mu_min", self.mu_min > 0),
            ("max_newton", self.max_newton >= 1),
        ]
        for key, ok in checks:
            if not ok:
                raise ConfigError(f"config key '{key}' out of range: {getattr(self, key)}")

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_CONFIG = ExperimentConfig()

_INT_KEYS = {"p", "N", "K", "seed", "max_newton"}
_FLOAT_KEYS = {"alpha", "m", "tau", "T", "prox_tol", "newton_tol", "mu_min"}
_STR_KEYS = {"initial", "out"}


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate one TOML config file."""
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}")

    kwargs = {}
    for key, value in raw.items():
        if key in _INT_KEYS:
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"{path}: key '{key}' must be an integer, got {value!r}")
            kwargs[key] = value
        elif key in _FLOAT_KEYS:
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigError(f"{path}: key '{key}' must be a number, got {value!r}")
            kwargs[key] = float(value)
        elif key in _STR_KEYS:
            if not isinstance(value, str):
                raise ConfigError(f"{path}: key '{key}' must be a string, got {value!r}")
            kwargs[key] = value
        elif key == "suites":
            if not (isinstance(value, list) and all(isinstance(v, str) for v in value)):
                raise ConfigError(f"{path}: key 'suites' must be a list of strings")
            kwargs[key] = value
        else:
            raise ConfigError(f"{path}: unknown config key '{key}'")
    return ExperimentConfig(**kwargs)
