"""
Scenario configuration.

Scenario files are TOML with the sections [params], [initial_state], [grid],
[sweep], [matrix] and [output]. Every key is optional; anything left out keeps
the published parameter values. Unknown sections or keys are errors.

    [params]
    eta = 0.3

    [grid]
    horizon = 100
    n_steps = 1000
    scheme = "fractional"      # or "local"

    [sweep]
    tolerance = 1e-3
    max_iterations = 500
    relaxation = 0.5
    stall_window = 10          # iterations without progress before halving relaxation
    min_relaxation = 0.015625
    initial_control = 0.0
    costate_variant = "paper_eq17"   # or "mechanical_adjoint"

    [matrix]
    alphas = [1.0, 0.99, 0.95, 0.90]
    strategies = ["bednets", "treatment", "spray", "bednets_treatment",
                  "bednets_spray", "treatment_spray", "all_controls"]
    workers = 1

    [output]
    dir = "outputs"
    plots = true
    report = true

MALARIA_OCP_OUTPUT_DIR and MALARIA_OCP_WORKERS fill in output.dir and
matrix.workers when the file leaves them out.
"""

from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple
import math
import os

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from core.errors import ConfigError, DomainError
from core.malaria import (
    BASELINE,
    COSTATE_VARIANTS,
    DEFAULT_HORIZON,
    DEFAULT_N_STEPS,
    STRATEGIES,
    ModelParams,
    StateVec,
    default_initial_state,
)
from core.sweep import SweepConfig
from tools.fractional import SCHEMES, TimeGrid

DEFAULT_ALPHAS = (1.0, 0.99, 0.95, 0.90)
DEFAULT_STRATEGIES = tuple(name for name in STRATEGIES if name != BASELINE)
DEFAULT_OUTPUT_DIR = "outputs"

ENV_OUTPUT_DIR = "MALARIA_OCP_OUTPUT_DIR"
ENV_WORKERS = "MALARIA_OCP_WORKERS"

PARAM_KEYS = tuple(f.name for f in fields(ModelParams) if f.name != "alpha")
SCHEMA: Dict[str, Tuple[str, ...]] = {
    "params": PARAM_KEYS,
    "initial_state": StateVec._fields,
    "grid": ("horizon", "n_steps", "scheme"),
    "sweep": ("tolerance", "max_iterations", "relaxation", "stall_window", "min_relaxation",
              "initial_control", "costate_variant"),
    "matrix": ("alphas", "strategies", "workers"),
    "output": ("dir", "plots", "report"),
}


@dataclass(frozen=True)
class ScenarioConfig:
    params: ModelParams = field(default_factory=ModelParams)
    initial_state: StateVec = field(default_factory=default_initial_state)
    horizon: float = DEFAULT_HORIZON
    n_steps: int = DEFAULT_N_STEPS
    scheme: str = "fractional"
    alphas: Tuple[float, ...] = DEFAULT_ALPHAS
    strategies: Tuple[str, ...] = DEFAULT_STRATEGIES
    sweep: SweepConfig = field(default_factory=SweepConfig)
    costate_variant: str = "paper_eq17"
    output_dir: Path = Path(DEFAULT_OUTPUT_DIR)
    workers: int = 1
    plots: bool = True
    report: bool = True

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid.from_horizon(self.horizon, self.n_steps)

    def params_for(self, alpha: float) -> ModelParams:
        return replace(self.params, alpha=alpha)

    def to_dict(self) -> dict:
        return {
            "params": {k: v for k, v in self.params.to_dict().items() if k != "alpha"},
            "initial_state": dict(self.initial_state._asdict()),
            "grid": {"horizon": self.horizon, "n_steps": self.n_steps, "scheme": self.scheme},
            "sweep": {
                **{k: v for k, v in asdict(self.sweep).items() if k != "initial_controls"},
                "initial_control": float(self.sweep.initial_controls),
                "costate_variant": self.costate_variant,
            },
            "matrix": {"alphas": list(self.alphas), "strategies": list(self.strategies), "workers": self.workers},
            "output": {"dir": str(self.output_dir), "plots": self.plots, "report": self.report},
        }


def _number(section: str, key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"[{section}].{key} must be a finite number, got {value!r}")
    return float(value)


def _integer(section: str, key: str, value: Any, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"[{section}].{key} must be an integer >= {minimum}, got {value!r}")
    return value


def _boolean(section: str, key: str, value: Any) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"[{section}].{key} must be true or false, got {value!r}")
    return value


def _choice(section: str, key: str, value: Any, options) -> str:
    if value not in options:
        raise ConfigError(f"[{section}].{key} must be one of {list(options)}, got {value!r}")
    return value


def _check_schema(data: Dict[str, Any], source: str):
    for section, body in data.items():
        if section not in SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]; expected one of {list(SCHEMA)}")
        if not isinstance(body, dict):
            raise ConfigError(f"{source}: [{section}] must be a table")
        if section == "params" and "alpha" in body:
            raise ConfigError(
                f"{source}: [params].alpha = {body['alpha']!r} is not a parameter; the fractional order "
                f"is set per run in [matrix].alphas, each value under the constraint 0 < alpha <= 1"
            )
        unknown = [key for key in body if key not in SCHEMA[section]]
        if unknown:
            raise ConfigError(f"{source}: unknown key(s) {unknown} in [{section}]; allowed: {list(SCHEMA[section])}")


def _alphas(values: Any) -> Tuple[float, ...]:
    if not isinstance(values, list) or not values:
        raise ConfigError("[matrix].alphas must be a non-empty list")
    out = []
    for i, value in enumerate(values):
        alpha = _number("matrix", f"alphas[{i}]", value)
        if not 0.0 < alpha <= 1.0:
            raise ConfigError(f"[matrix].alphas[{i}] = {value!r} violates the constraint 0 < alpha <= 1")
        out.append(alpha)
    return tuple(out)


def _strategies(values: Any) -> Tuple[str, ...]:
    if not isinstance(values, list) or not values:
        raise ConfigError("[matrix].strategies must be a non-empty list")
    for i, name in enumerate(values):
        _choice("matrix", f"strategies[{i}]", name, STRATEGIES)
    if len(set(values)) != len(values):
        raise ConfigError("[matrix].strategies contains duplicates")
    return tuple(values)


def _output_dir(value: Any) -> Path:
    if not isinstance(value, str) or not value:
        raise ConfigError(f"[output].dir must be a non-empty string, got {value!r}")
    path = Path(value)
    existing = path
    while not existing.exists() and existing != existing.parent:
        existing = existing.parent
    if existing.exists() and not (existing.is_dir() and os.access(existing, os.W_OK)):
        raise ConfigError(f"[output].dir {value!r} is not writable")
    return path


def config_from_dict(data: Dict[str, Any], source: str = "<config>") -> ScenarioConfig:
    """Validate a parsed mapping and merge it over the defaults."""
    _check_schema(data, source)
    section = lambda name: data.get(name, {})  # noqa: E731

    try:
        params = ModelParams(**{k: _number("params", k, v) for k, v in section("params").items()})
    except DomainError as e:
        raise ConfigError(f"{source}: [params] {e}")

    state = default_initial_state()._asdict()
    for key, value in section("initial_state").items():
        state[key] = _number("initial_state", key, value)
        if state[key] < 0:
            raise ConfigError(f"[initial_state].{key} must be >= 0, got {value!r}")
    initial_state = StateVec(**state)
    if initial_state.S_H + initial_state.I_H + initial_state.R_H <= 0:
        raise ConfigError("[initial_state] needs a positive human population")

    grid = section("grid")
    horizon = _number("grid", "horizon", grid.get("horizon", DEFAULT_HORIZON))
    if horizon <= 0:
        raise ConfigError(f"[grid].horizon must be > 0, got {horizon!r}")
    n_steps = _integer("grid", "n_steps", grid.get("n_steps", DEFAULT_N_STEPS))
    scheme = _choice("grid", "scheme", grid.get("scheme", "fractional"), SCHEMES)

    sw = section("sweep")
    initial_control = _number("sweep", "initial_control", sw.get("initial_control", 0.0))
    if not 0.0 <= initial_control <= 1.0:
        raise ConfigError(f"[sweep].initial_control must lie in [0, 1], got {initial_control!r}")
    try:
        sweep = SweepConfig(
            tolerance=_number("sweep", "tolerance", sw.get("tolerance", SweepConfig.tolerance)),
            max_iterations=_integer("sweep", "max_iterations", sw.get("max_iterations", SweepConfig.max_iterations)),
            relaxation=_number("sweep", "relaxation", sw.get("relaxation", SweepConfig.relaxation)),
            stall_window=_integer("sweep", "stall_window", sw.get("stall_window", SweepConfig.stall_window)),
            min_relaxation=_number("sweep", "min_relaxation", sw.get("min_relaxation", SweepConfig.min_relaxation)),
            initial_controls=initial_control,
        )
    except DomainError as e:
        raise ConfigError(f"{source}: [sweep] {e}")
    variant = _choice("sweep", "costate_variant", sw.get("costate_variant", "paper_eq17"), COSTATE_VARIANTS)

    matrix = section("matrix")
    alphas = _alphas(matrix["alphas"]) if "alphas" in matrix else DEFAULT_ALPHAS
    strategies = _strategies(matrix["strategies"]) if "strategies" in matrix else DEFAULT_STRATEGIES
    workers = matrix.get("workers", os.getenv(ENV_WORKERS, "1"))
    if isinstance(workers, str):
        try:
            workers = int(workers)
        except ValueError:
            raise ConfigError(f"{ENV_WORKERS} must be an integer, got {workers!r}")
    workers = _integer("matrix", "workers", workers)

    out = section("output")
    output_dir = _output_dir(out.get("dir", os.getenv(ENV_OUTPUT_DIR, DEFAULT_OUTPUT_DIR)))

    return ScenarioConfig(
        params=params,
        initial_state=initial_state,
        horizon=horizon,
        n_steps=n_steps,
        scheme=scheme,
        alphas=alphas,
        strategies=strategies,
        sweep=sweep,
        costate_variant=variant,
        output_dir=output_dir,
        workers=workers,
        plots=_boolean("output", "plots", out.get("plots", True)),
        report=_boolean("output", "report", out.get("report", True)),
    )


def parse_config(path) -> ScenarioConfig:
    """Read and validate a scenario file. Parse errors carry the TOML line and column."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: parse error: {e}")
    return config_from_dict(data, source=str(path))


def with_overrides(config: ScenarioConfig, output_dir: Optional[str] = None,
                   workers: Optional[int] = None) -> ScenarioConfig:
    """Apply CLI flags on top of a parsed config."""
    changes = {}
    if output_dir is not None:
        changes["output_dir"] = _output_dir(output_dir)
    if workers is not None:
        changes["workers"] = _integer("cli", "workers", workers)
    return replace(config, **changes)
