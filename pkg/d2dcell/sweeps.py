""" Parameter sweeps: analytic and Monte Carlo evaluation of grid points,
tabular records and their CSV/JSON serialization """
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import pandas as pd  # type: ignore
from tqdm import tqdm  # type: ignore

from d2dcell.config import RunConfig, SweepSpec
from d2dcell.constants.defaults import QOS_XI_RATIO_BOUNDS
from d2dcell.constants.misc import (
    MONTE_CARLO_ONLY,
    VALIDATION_TOLERANCES,
    Quantity,
    SweptParameter,
)
from d2dcell.errors import D2DError
from d2dcell.metrics import (
    FadingSpec,
    NetworkConfig,
    avg_dues,
    avg_successful_transmissions,
    outage_bs,
    outage_drx,
    solve_xi_for_qos,
    spectrum_reuse_ratio,
)
from d2dcell.mode_selection import p_d2d
from d2dcell.simulations import MonteCarloPlayground
from d2dcell.utils import linear_to_db

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 9
COLUMNS = (
    "parameter",
    "value",
    "quantity",
    "analytic",
    "mc_mean",
    "mc_ci",
    "seed",
    "status",
)


def _round(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return value
    return float(f"{value:.{SIGNIFICANT_DIGITS}g}")


@dataclass(frozen=True)
class MetricRecord:
    """
    One (grid point, quantity) result row

    Attributes:
        parameter (str): swept parameter name
        value (float): grid value
        quantity (str): metric name
        analytic (float): nan when the quantity has no analytic form or
            the point failed
        mc_mean (Optional[float]): Monte Carlo estimate
        mc_ci (Optional[float]): 95% half-width of mc_mean
        seed (Optional[int]): master seed of the Monte Carlo run
        status (str): "ok", "pass"/"fail" after validation, or the error
            that stopped the point
    """

    parameter: str
    value: float
    quantity: str
    analytic: float
    mc_mean: Optional[float] = None
    mc_ci: Optional[float] = None
    seed: Optional[int] = None
    status: str = "ok"

    def rounded(self) -> "MetricRecord":
        """ Copy with floats kept to the serialized precision """
        return replace(
            self,
            value=_round(self.value),
            analytic=_round(self.analytic),
            mc_mean=_round(self.mc_mean),
            mc_ci=_round(self.mc_ci),
        )


class PointEvaluator:
    """
    Evaluates the requested quantities at one configuration, computing
    the shared pieces (QoS threshold, M, Monte Carlo run) once

    Attributes:
        config (RunConfig): configuration at this grid point
        spec (SweepSpec)
        network (NetworkConfig): scenario, with the solved threshold when
            a QoS target is set
        fading (FadingSpec)
        xi_db (float): threshold used, dB relative to rho_D
        evaluations (Dict[Quantity, float]): analytic values computed
    """

    def __init__(self, config: RunConfig, spec: SweepSpec) -> None:
        self.config = config
        self.spec = spec
        self.fading: FadingSpec = config.to_fading()
        self.gamma: float = config.gamma
        self.distance: float = (
            config.sweep.tagged_distance
            if SweptParameter(spec.parameter) is SweptParameter.D
            else spec.tagged_distance
        )
        self.network: NetworkConfig = config.to_network_config()
        self.evaluations: Dict[Quantity, float] = {}
        self.xi_db = linear_to_db(self.network.mode.xi_ratio)
        if spec.qos_target is not None:
            self._apply_qos_target(spec.qos_target)

    def _apply_qos_target(self, target: float) -> None:
        solution = solve_xi_for_qos(
            target, self.gamma, self.network, self.fading
        )
        rho_d = self.network.mode.rho_d
        if solution.saturated:
            # Evaluate with every p-DUE admitted, at the top of the search
            self.network = self.network.with_xi(rho_d * QOS_XI_RATIO_BOUNDS[1])
        else:
            self.network = self.network.with_xi(solution.xi)
        self.xi_db = solution.xi_db(rho_d)

    def analytic(self, quantity: Quantity) -> float:
        if quantity not in self.evaluations:
            self.evaluations[quantity] = self._compute(quantity)
        return self.evaluations[quantity]

    def _compute(self, quantity: Quantity) -> float:
        network, fading, gamma = self.network, self.fading, self.gamma
        if quantity in MONTE_CARLO_ONLY:
            return math.nan
        if quantity is Quantity.OUTAGE_BS:
            return outage_bs(gamma, network, fading)
        if quantity is Quantity.OUTAGE_DRX_AT_D:
            return outage_drx(gamma, self.distance, network, fading)
        if quantity is Quantity.M_BAR:
            return avg_successful_transmissions(gamma, network, fading)
        if quantity is Quantity.M_BAR_D2D:
            return avg_dues(network)
        if quantity is Quantity.TAU:
            m_bar = self.analytic(Quantity.M_BAR)
            dues = self.analytic(Quantity.M_BAR_D2D)
            if not dues > 0:
                return spectrum_reuse_ratio(gamma, network, fading)
            return min(1.0, max(0.0, m_bar / dues))
        if quantity is Quantity.P_D2D:
            return p_d2d(
                self.distance,
                network.mode,
                network.geometry,
                network.method,
                network.quadrature,
            )
        if quantity is Quantity.XI_DB:
            return self.xi_db
        raise ValueError(f"No analytic value for {quantity.value}")

    def playground(self) -> MonteCarloPlayground:
        """ Plays the Monte Carlo realizations of this point """
        playground = MonteCarloPlayground(
            self.network,
            self.fading,
            gamma=self.gamma,
            tagged_distance=self.distance,
            confine_drx=self.spec.confine_drx,
            seed=self.spec.seed,
            workers=self.spec.mc_workers,
            show_progress=False,
        )
        playground.play_multiple_realizations(self.spec.n_realizations)
        return playground


def evaluate_point(
    config: RunConfig,
    spec: SweepSpec,
    value: float,
    analytic: bool = True,
) -> List[MetricRecord]:
    """
    Records of every requested quantity at one grid value. Failures are
    written into the status column of the affected rows

    Args:
        config (RunConfig): base configuration
        spec (SweepSpec)
        value (float): grid value of spec.parameter
        analytic (bool): False leaves the analytic column empty
    Returns:
        (List[MetricRecord]): one per quantity, in request order
    """
    parameter = SweptParameter(spec.parameter).value
    rows = [
        MetricRecord(parameter, float(value), Quantity(q).value, math.nan)
        for q in spec.quantities
    ]
    try:
        evaluator = PointEvaluator(config.at(spec.parameter, value), spec)
    except D2DError as error:
        status = f"{type(error).__name__}: {error}"
        logger.warning("%s = %g failed: %s", parameter, value, status)
        return [replace(row, status=status) for row in rows]

    if analytic:
        for index, quantity in enumerate(spec.quantities):
            try:
                result = evaluator.analytic(Quantity(quantity))
                rows[index] = replace(rows[index], analytic=result)
            except D2DError as error:
                rows[index] = replace(
                    rows[index], status=f"{type(error).__name__}: {error}"
                )

    if spec.n_realizations > 0:
        try:
            playground = evaluator.playground()
        except D2DError as error:
            status = f"{type(error).__name__}: {error}"
            return [replace(row, status=status) for row in rows]
        for index, quantity in enumerate(spec.quantities):
            if Quantity(quantity) is Quantity.XI_DB:
                continue
            try:
                estimate = playground.estimate(quantity)
            except D2DError as error:
                rows[index] = replace(
                    rows[index], status=f"{type(error).__name__}: {error}"
                )
                continue
            rows[index] = replace(
                rows[index],
                mc_mean=estimate.mean,
                mc_ci=estimate.ci_halfwidth,
                seed=spec.seed,
            )
    logger.info("%s = %g evaluated", parameter, value)
    return rows


def _evaluate_task(task: tuple) -> List[MetricRecord]:
    return evaluate_point(*task)


def run_sweep(
    spec: SweepSpec,
    config: RunConfig,
    analytic: bool = True,
    show_progress: bool = True,
) -> List[MetricRecord]:
    """
    Evaluates every grid point, in parallel processes when
    spec.workers > 1. Output is ordered by grid index then quantity

    Args:
        spec (SweepSpec)
        config (RunConfig)
        analytic (bool): False for Monte Carlo only rows
        show_progress (bool)
    Returns:
        (List[MetricRecord]): len(grid) * len(quantities) records
    """
    tasks = [(config, spec, value, analytic) for value in spec.grid]
    records: List[MetricRecord] = []
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as executor:
            progress_bar = tqdm(
                executor.map(_evaluate_task, tasks),
                total=len(tasks),
                disable=not show_progress,
            )
            for rows in progress_bar:
                progress_bar.set_description(f"Grid point {rows[0].value:g}")
                records.extend(rows)
        return records

    progress_bar = tqdm(tasks, disable=not show_progress)
    for task in progress_bar:
        progress_bar.set_description(f"Grid point {task[2]:g}")
        records.extend(_evaluate_task(task))
    return records


def _passes(record: MetricRecord) -> bool:
    quantity = Quantity(record.quantity)
    absolute, relative = VALIDATION_TOLERANCES[quantity]
    if record.mc_mean is None or math.isnan(record.analytic):
        return False
    tolerance = max(absolute, relative * abs(record.analytic))
    spread = 3 * (record.mc_ci or 0.0)
    return abs(record.analytic - record.mc_mean) <= max(tolerance, spread)


def validate_records(records: Sequence[MetricRecord]) -> List[MetricRecord]:
    """
    Marks each row "pass" or "fail" on |analytic - mc| <= max(tolerance,
    3 CI half-widths). Rows without a tolerance or that already failed
    keep their status

    Args:
        records (Sequence[MetricRecord]): rows with both columns filled
    Returns:
        (List[MetricRecord])
    """
    checked = []
    for record in records:
        quantity = Quantity(record.quantity)
        if record.status != "ok" or quantity not in VALIDATION_TOLERANCES:
            checked.append(record)
            continue
        status = "pass" if _passes(record) else "fail"
        if status == "fail":
            logger.warning(
                "%s at %s = %g: analytic %.6g, Monte Carlo %s +- %s",
                record.quantity,
                record.parameter,
                record.value,
                record.analytic,
                record.mc_mean,
                record.mc_ci,
            )
        checked.append(replace(record, status=status))
    return checked


def _records_frame(records: Sequence[MetricRecord]) -> pd.DataFrame:
    frame = pd.DataFrame([asdict(record) for record in records])
    frame = frame[list(COLUMNS)]
    for column in ("value", "analytic", "mc_mean", "mc_ci"):
        frame[column] = frame[column].astype(float)
    frame["seed"] = frame["seed"].astype("Int64")
    return frame


def _to_json(records: Sequence[MetricRecord]) -> str:
    rows = [asdict(record.rounded()) for record in records]
    return json.dumps(rows, indent=2) + "\n"


EMITTERS: Dict[str, Callable[[Sequence[MetricRecord]], str]] = {
    "csv": lambda records: _records_frame(records).to_csv(
        index=False, float_format=f"%.{SIGNIFICANT_DIGITS}g"
    ),
    "json": _to_json,
}


def emit(
    records: Sequence[MetricRecord],
    fmt: str = "csv",
    destination: Optional[Union[str, Path]] = None,
) -> str:
    """
    Serializes records with 9 significant digits, as CSV with a header
    row or as a JSON array

    Args:
        records (Sequence[MetricRecord]): non-empty
        fmt (str): "csv" or "json"
        destination (Optional[Union[str, Path]]): file to write, if any
    Raises:
        ValueError: on no records or an unknown format
        OSError: if the destination cannot be written
    Returns:
        (str): the serialized text
    """
    if not records:
        raise ValueError("No records to emit")
    if fmt not in EMITTERS:
        raise ValueError(f"Unknown format {fmt!r}, choose from {list(EMITTERS)}")
    text = EMITTERS[fmt](records)
    if destination is not None:
        try:
            with open(destination, "w", newline="") as f:
                f.write(text)
        except OSError as error:
            raise OSError(f"Cannot write {destination}: {error}") from error
        logger.info("Wrote %d records to %s", len(records), destination)
    return text


def _optional(value) -> Optional[float]:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return None
    return float(value)


def parse_records(text: str, fmt: str = "csv") -> List[MetricRecord]:
    """ Reads records back from emit output """
    if fmt == "json":
        rows = json.loads(text)
    elif fmt == "csv":
        frame = pd.read_csv(
            io.StringIO(text), dtype={"seed": "Int64", "status": str}
        )
        rows = frame.astype(object).where(frame.notna(), None).to_dict(
            "records"
        )
    else:
        raise ValueError(f"Unknown format {fmt!r}")
    return [
        MetricRecord(
            parameter=str(row["parameter"]),
            value=float(row["value"]),
            quantity=str(row["quantity"]),
            analytic=math.nan if row["analytic"] is None else float(
                row["analytic"]
            ),
            mc_mean=_optional(row["mc_mean"]),
            mc_ci=_optional(row["mc_ci"]),
            seed=None if row["seed"] is None else int(row["seed"]),
            status=str(row["status"]),
        )
        for row in rows
    ]
