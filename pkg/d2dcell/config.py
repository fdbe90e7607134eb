""" Run configuration: YAML documents with dotted keys, packaged presets
and command-line overrides, validated into the linear-unit types the
analysis uses """
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from d2dcell.constants import defaults
from d2dcell.constants.misc import (
    ANALYTIC_QUANTITIES,
    MONTE_CARLO_ONLY,
    Method,
    Quantity,
    SweptParameter,
)
from d2dcell.constants.presets import PRESET_PATHS
from d2dcell.errors import ConfigError
from d2dcell.geometry import CellGeometry
from d2dcell.metrics import FadingSpec, NetworkConfig
from d2dcell.mode_selection import ModeSelectionParams
from d2dcell.specfun import QuadratureSettings
from d2dcell.utils import db_to_linear, dbm_to_watts, load_yaml_mapping

logger = logging.getLogger(__name__)

# Config key moved by each swept parameter
SWEEP_KEYS = {
    SweptParameter.XI_DB: "mode.xi_db",
    SweptParameter.D: "sweep.tagged_distance",
    SweptParameter.LAMBDA: "density",
    SweptParameter.RHO_D_DBM: "sensitivity.d2d_dbm",
}


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GeometrySection(_Section):
    radius: float = Field(defaults.CELL_RADIUS, gt=0)
    d2d_range: float = Field(defaults.D2D_RANGE, gt=0)


class SensitivitySection(_Section):
    bs_dbm: float = defaults.RHO_BS_DBM
    d2d_dbm: float = defaults.RHO_D_DBM


class PathlossSection(_Section):
    cellular: float = Field(defaults.ALPHA_C, ge=2, le=6)
    d2d: float = Field(defaults.ALPHA_D, ge=2, le=6)


class ModeSection(_Section):
    xi_db: float = defaults.XI_DB
    xi_watts: Optional[float] = Field(None, gt=0)
    gamma_approx_n: int = Field(defaults.GAMMA_APPROX_N, ge=1)


class SirSection(_Section):
    gamma_db: float = defaults.GAMMA_DB


class FadingSection(_Section):
    m_cellular: int = Field(defaults.M_CELLULAR, ge=1, le=5)
    m_d2d: int = Field(defaults.M_D2D, ge=1, le=5)


class QuadratureSection(_Section):
    rel_tol: float = Field(defaults.MGF_QUADRATURE["rel_tol"], gt=0)
    abs_tol: float = Field(defaults.MGF_QUADRATURE["abs_tol"], ge=0)
    max_subdivisions: int = Field(
        defaults.MGF_QUADRATURE["max_subdivisions"], ge=1
    )

    def to_settings(self) -> QuadratureSettings:
        return QuadratureSettings(
            self.rel_tol, self.abs_tol, self.max_subdivisions
        )


class MetricQuadratureSection(QuadratureSection):
    rel_tol: float = Field(defaults.METRIC_QUADRATURE["rel_tol"], gt=0)
    abs_tol: float = Field(defaults.METRIC_QUADRATURE["abs_tol"], ge=0)
    max_subdivisions: int = Field(
        defaults.METRIC_QUADRATURE["max_subdivisions"], ge=1
    )


class MonteCarloSection(_Section):
    n_realizations: int = Field(0, ge=0)
    seed: int = Field(defaults.MC_SEED, ge=0)
    confine_drx: bool = True
    workers: int = Field(1, ge=1)


class SweepSection(_Section):
    parameter: SweptParameter = SweptParameter.XI_DB
    grid: List[float] = [-10.0, 0.0, 10.0]
    quantities: List[Quantity] = [Quantity.OUTAGE_BS]
    qos_target: Optional[float] = Field(None, gt=0, lt=1)
    tagged_distance: float = Field(250.0, ge=0)
    workers: int = Field(1, ge=1)


class RunConfig(_Section):
    """
    Validated run configuration in the units users type. Every field has
    a default and unknown keys are rejected

    Methods:
        to_network_config () -> NetworkConfig
        to_fading () -> FadingSpec
        to_sweep_spec () -> SweepSpec
        at (parameter, value) -> RunConfig: copy with one parameter moved
        flat () -> Dict[str, Any]: dotted-key view
    """

    geometry: GeometrySection = GeometrySection()
    density: float = Field(defaults.DENSITY, ge=0)
    sensitivity: SensitivitySection = SensitivitySection()
    pathloss: PathlossSection = PathlossSection()
    mode: ModeSection = ModeSection()
    sir: SirSection = SirSection()
    fading: FadingSection = FadingSection()
    method: Method = Method.AUTO
    quadrature: QuadratureSection = QuadratureSection()
    metric_quadrature: MetricQuadratureSection = MetricQuadratureSection()
    monte_carlo: MonteCarloSection = MonteCarloSection()
    sweep: SweepSection = SweepSection()

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "RunConfig":
        """
        Builds a config from a flat or nested mapping

        Raises:
            ConfigError: on unknown keys or invalid values
        """
        try:
            return cls.model_validate(unflatten(flatten(mapping)))
        except ValidationError as error:
            raise ConfigError(f"Invalid configuration:\n{error}") from error

    def flat(self) -> Dict[str, Any]:
        return flatten(self.model_dump(mode="json"))

    @property
    def gamma(self) -> float:
        """ Linear SIR threshold """
        return db_to_linear(self.sir.gamma_db)

    @property
    def xi(self) -> float:
        """ Admission threshold in watts """
        if self.mode.xi_watts is not None:
            return self.mode.xi_watts
        return dbm_to_watts(self.sensitivity.d2d_dbm) * db_to_linear(
            self.mode.xi_db
        )

    def value_of(self, parameter: SweptParameter) -> float:
        """ Current value of a sweepable parameter """
        parameter = SweptParameter(parameter)
        if parameter is SweptParameter.XI_DB and self.mode.xi_watts:
            raise ConfigError("xi_db is undefined when mode.xi_watts is set")
        return float(self.flat()[SWEEP_KEYS[parameter]])

    def at(self, parameter: SweptParameter, value: float) -> "RunConfig":
        """ Copy with a swept parameter moved to value """
        parameter = SweptParameter(parameter)
        updates = {SWEEP_KEYS[parameter]: value}
        if parameter is SweptParameter.XI_DB:
            updates["mode.xi_watts"] = None
        return RunConfig.from_mapping({**self.flat(), **updates})

    def to_network_config(self) -> NetworkConfig:
        """
        Scenario in watts and meters

        Raises:
            ConfigError: if the values break a domain invariant
        """
        try:
            mode = ModeSelectionParams(
                xi=self.xi,
                rho_d=dbm_to_watts(self.sensitivity.d2d_dbm),
                rho_bs=dbm_to_watts(self.sensitivity.bs_dbm),
                alpha_c=self.pathloss.cellular,
                alpha_d=self.pathloss.d2d,
                gamma_approx_n=self.mode.gamma_approx_n,
            )
            return NetworkConfig(
                geometry=CellGeometry(
                    self.geometry.radius, self.geometry.d2d_range
                ),
                mode=mode,
                density=self.density,
                quadrature=self.quadrature.to_settings(),
                metric_quadrature=self.metric_quadrature.to_settings(),
                method=self.method,
            )
        except ValueError as error:
            raise ConfigError(str(error)) from error

    def to_fading(self) -> FadingSpec:
        return FadingSpec(self.fading.m_cellular, self.fading.m_d2d)

    def to_sweep_spec(self) -> "SweepSpec":
        try:
            return SweepSpec(
                parameter=self.sweep.parameter,
                grid=tuple(self.sweep.grid),
                quantities=tuple(self.sweep.quantities),
                qos_target=self.sweep.qos_target,
                tagged_distance=self.sweep.tagged_distance,
                n_realizations=self.monte_carlo.n_realizations,
                seed=self.monte_carlo.seed,
                confine_drx=self.monte_carlo.confine_drx,
                mc_workers=self.monte_carlo.workers,
                workers=self.sweep.workers,
            )
        except ValueError as error:
            raise ConfigError(str(error)) from error


@dataclass(frozen=True)
class SweepSpec:
    """
    What a sweep varies, what it reports and how it simulates

    Attributes:
        parameter (SweptParameter)
        grid (Tuple[float, ...]): strictly monotone values
        quantities (Tuple[Quantity, ...])
        qos_target (Optional[float]): solve xi per point for this BS outage
        tagged_distance (float): DRx distance when d is not swept
        n_realizations (int): 0 for analytic-only rows
        seed (int)
        confine_drx (bool)
        mc_workers (int): threads per Monte Carlo run
        workers (int): processes across grid points
    """

    parameter: SweptParameter = SweptParameter.XI_DB
    grid: Tuple[float, ...] = (0.0,)
    quantities: Tuple[Quantity, ...] = (Quantity.OUTAGE_BS,)
    qos_target: Optional[float] = None
    tagged_distance: float = 250.0
    n_realizations: int = 0
    seed: int = defaults.MC_SEED
    confine_drx: bool = True
    mc_workers: int = 1
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.grid:
            raise ValueError("Sweep grid is empty")
        steps = [b - a for a, b in zip(self.grid, self.grid[1:])]
        if not (all(s > 0 for s in steps) or all(s < 0 for s in steps)):
            raise ValueError(f"Sweep grid not strictly monotone: {self.grid}")
        if not self.quantities:
            raise ValueError("No quantities requested")
        allowed = ANALYTIC_QUANTITIES + MONTE_CARLO_ONLY
        for quantity in self.quantities:
            if Quantity(quantity) not in allowed:
                raise ValueError(f"{quantity} cannot be swept")
        if self.qos_target is not None and not 0 < self.qos_target < 1:
            raise ValueError(f"QoS target not in (0, 1): {self.qos_target}")


def flatten(mapping: Mapping[str, Any], prefix: str = "") -> Dict[str, Any]:
    """ Nested mapping to dotted keys. Lists are leaves """
    flat: Dict[str, Any] = {}
    for key, value in mapping.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(flatten(value, f"{name}."))
        else:
            flat[name] = value
    return flat


def unflatten(flat: Mapping[str, Any]) -> Dict[str, Any]:
    """ Dotted keys to a nested mapping """
    nested: Dict[str, Any] = {}
    for key, value in flat.items():
        *sections, leaf = str(key).split(".")
        node = nested
        for section in sections:
            node = node.setdefault(section, {})
            if not isinstance(node, dict):
                raise ConfigError(f"Key {key} conflicts with a value")
        if isinstance(node.get(leaf), dict):
            raise ConfigError(f"Key {key} conflicts with section {leaf}")
        node[leaf] = value
    return nested


def parse_override(assignment: str) -> Tuple[str, Any]:
    """
    Splits a --set KEY=VALUE assignment, reading VALUE as YAML

    Raises:
        ConfigError: if there is no '=' or VALUE is not valid YAML
    """
    key, separator, text = assignment.partition("=")
    if not separator or not key.strip():
        raise ConfigError(f"Expected KEY=VALUE, got {assignment!r}")
    try:
        return key.strip(), yaml.safe_load(text)
    except yaml.YAMLError as error:
        raise ConfigError(f"Unreadable value in {assignment!r}") from error


def _read_document(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        return flatten(load_yaml_mapping(path))
    except (OSError, TypeError, yaml.YAMLError) as error:
        raise ConfigError(f"Cannot read configuration {path}: {error}") from (
            error
        )


def load_run_config(
    path: Optional[Union[str, Path]] = None,
    preset: Optional[str] = None,
    overrides: Iterable[str] = (),
    seed: Optional[int] = None,
    mc_runs: Optional[int] = None,
) -> RunConfig:
    """
    Merges, in increasing priority, the reference-scenario defaults, a packaged
    preset, a configuration file, --set overrides and the --seed and
    --mc-runs shortcuts

    Args:
        path (Optional[Union[str, Path]]): YAML document
        preset (Optional[str]): name of a packaged preset
        overrides (Iterable[str]): KEY=VALUE assignments
        seed (Optional[int])
        mc_runs (Optional[int])
    Raises:
        ConfigError: on unknown presets, unreadable files or invalid values
    Returns:
        (RunConfig)
    """
    merged: Dict[str, Any] = {}
    if preset is not None:
        if preset not in PRESET_PATHS:
            raise ConfigError(
                f"Unknown preset {preset!r}, choose from {sorted(PRESET_PATHS)}"
            )
        merged.update(_read_document(PRESET_PATHS[preset]))
    if path is not None:
        merged.update(_read_document(path))
    for assignment in overrides:
        key, value = parse_override(assignment)
        merged[key] = value
    if seed is not None:
        merged["monte_carlo.seed"] = seed
    if mc_runs is not None:
        merged["monte_carlo.n_realizations"] = mc_runs
    logger.debug("Configuration keys set: %s", sorted(merged))
    return RunConfig.from_mapping(merged)
