""" Monte Carlo simulation of the cell: PPP of p-DUEs, mode selection,
interference and SIR at the BS and at DRxs """
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, NamedTuple, Optional, Union

import numpy as np  # type: ignore
from tqdm import tqdm  # type: ignore

from d2dcell.constants.defaults import CI_Z_SCORE, MC_MIN_REALIZATIONS, MC_SEED
from d2dcell.constants.misc import Quantity
from d2dcell.errors import InsufficientSamplesError
from d2dcell.metrics import FadingSpec, NetworkConfig
from d2dcell.mode_selection import ModeSelectionParams, is_underlay

logger = logging.getLogger(__name__)

# Single-interferer MGF samples drawn per random stream
MGF_CHUNK = 10000


@dataclass
class Realization:
    """
    One sampled network: the CUE and every p-DUE with its DRx

    Attributes:
        index (int): realization number within its run
        seed (int): master seed of the run. (seed, index) replays the
            realization and every fading draw made for it
        cue (np.ndarray): CUE position, shape (2,)
        pdues (np.ndarray): p-DUE positions, shape (n, 2)
        drxs (np.ndarray): DRx positions, shape (n, 2)
        r_d (np.ndarray): p-DUE to DRx distances
        r_c (np.ndarray): p-DUE to BS distances
        underlay (np.ndarray): admission flags
    """

    index: int
    seed: int
    cue: np.ndarray
    pdues: np.ndarray
    drxs: np.ndarray
    r_d: np.ndarray
    r_c: np.ndarray
    underlay: np.ndarray

    def __repr__(self) -> str:
        return (
            f"Realization(index={self.index}, seed={self.seed}, "
            f"p-DUEs={self.n_pdues}, DUEs={self.n_dues})"
        )

    @property
    def n_pdues(self) -> int:
        return len(self.r_d)

    @property
    def n_dues(self) -> int:
        return int(np.count_nonzero(self.underlay))

    def to_record(self) -> dict:
        return {
            "index": self.index,
            "seed": self.seed,
            "cue": self.cue.tolist(),
            "pdues": self.pdues.tolist(),
            "drxs": self.drxs.tolist(),
            "r_d": self.r_d.tolist(),
            "r_c": self.r_c.tolist(),
            "underlay": [bool(flag) for flag in self.underlay],
        }

    @classmethod
    def from_record(cls, record: dict) -> "Realization":
        return cls(
            index=int(record["index"]),
            seed=int(record["seed"]),
            cue=np.asarray(record["cue"], dtype=float),
            pdues=np.asarray(record["pdues"], dtype=float).reshape(-1, 2),
            drxs=np.asarray(record["drxs"], dtype=float).reshape(-1, 2),
            r_d=np.asarray(record["r_d"], dtype=float),
            r_c=np.asarray(record["r_c"], dtype=float),
            underlay=np.asarray(record["underlay"], dtype=bool),
        )


@dataclass(frozen=True)
class EstimatorResult:
    """
    Monte Carlo estimate with its 95% normal-approximation interval

    Attributes:
        mean (float)
        ci_halfwidth (float)
        n_samples (int)
    """

    mean: float
    ci_halfwidth: float
    n_samples: int

    @classmethod
    def from_samples(cls, samples: Iterable[float]) -> "EstimatorResult":
        values = np.asarray(list(samples), dtype=float)
        if values.size == 0:
            raise InsufficientSamplesError("No samples to estimate from")
        if values.size == 1:
            return cls(float(values[0]), 0.0, 1)
        halfwidth = CI_Z_SCORE * values.std(ddof=1) / math.sqrt(values.size)
        return cls(float(values.mean()), float(halfwidth), int(values.size))

    @classmethod
    def from_ratio(
        cls, numerators: Iterable[float], denominators: Iterable[float]
    ) -> "EstimatorResult":
        """ Ratio of means with a delta-method interval """
        top = np.asarray(list(numerators), dtype=float)
        bottom = np.asarray(list(denominators), dtype=float)
        if bottom.size < 2 or not bottom.mean() > 0:
            raise InsufficientSamplesError("Ratio needs a positive denominator")
        ratio = top.mean() / bottom.mean()
        residual = top - ratio * bottom
        halfwidth = (
            CI_Z_SCORE
            * residual.std(ddof=1)
            / (bottom.mean() * math.sqrt(bottom.size))
        )
        return cls(float(ratio), float(halfwidth), int(bottom.size))

    def covers(self, value: float, tolerance: float = 0.0) -> bool:
        """ True when value is within max(tolerance, 3 half-widths) """
        return abs(value - self.mean) <= max(tolerance, 3 * self.ci_halfwidth)


class RealizationOutcome(NamedTuple):
    """ Everything the estimators need from one realization """

    realization: Realization
    outage_bs: bool
    tagged_admitted: bool
    tagged_outage: Optional[bool]
    successes: int
    dues: int


def realization_rng(seed: int, index: int) -> np.random.Generator:
    """ Independent stream of realization `index` under a master seed """
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(index,))
    )


def uniform_in_disk(
    rng: np.random.Generator, n: int, radius: float
) -> np.ndarray:
    """ n points uniform over the area of a disk, shape (n, 2) """
    r = radius * np.sqrt(rng.random(n))
    theta = 2 * np.pi * rng.random(n)
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def sample_realization(
    config: NetworkConfig,
    rng: np.random.Generator,
    confine_drx: bool = True,
    index: int = 0,
    seed: int = MC_SEED,
) -> Realization:
    """
    Draws one network: Poisson number of p-DUEs uniform in the cell,
    each DRx uniform within R_D of its p-DUE, and the CUE uniform in the
    cell

    Args:
        config (NetworkConfig)
        rng (np.random.Generator): stream of this realization
        confine_drx (bool): resample DRxs that fall outside the cell
        index (int): realization number, recorded only
        seed (int): master seed, recorded only
    Returns:
        (Realization)
    """
    geom = config.geometry
    n = int(rng.poisson(config.density * geom.area))
    pdues = uniform_in_disk(rng, n, geom.radius)
    offsets = uniform_in_disk(rng, n, geom.d2d_range)
    if confine_drx:
        outside = np.hypot(*(pdues + offsets).T) > geom.radius
        while np.any(outside):
            offsets[outside] = uniform_in_disk(
                rng, int(np.count_nonzero(outside)), geom.d2d_range
            )
            outside = np.hypot(*(pdues + offsets).T) > geom.radius
    r_d = np.hypot(offsets[:, 0], offsets[:, 1])
    r_c = np.hypot(pdues[:, 0], pdues[:, 1])
    cue = uniform_in_disk(rng, 1, geom.radius)[0]
    realization = Realization(
        index=index,
        seed=seed,
        cue=cue,
        pdues=pdues,
        drxs=pdues + offsets,
        r_d=r_d,
        r_c=r_c,
        underlay=np.asarray(is_underlay(r_d, r_c, config.mode), dtype=bool),
    )
    _check_admission_budget(realization, config.mode)
    return realization


def bs_interference_terms(
    realization: Realization, mode: ModeSelectionParams
) -> np.ndarray:
    """ Fading-averaged interference each p-DUE would cause at the BS,
    rho_D r_d^alpha_D r_c^-alpha_C """
    return (
        mode.rho_d
        * realization.r_d ** mode.alpha_d
        * realization.r_c ** (-mode.alpha_c)
    )


def _check_admission_budget(
    realization: Realization, mode: ModeSelectionParams
) -> None:
    """ Every admitted p-DUE stays below xi at the BS, so the admitted
    total stays below n_dues * xi """
    admitted = bs_interference_terms(realization, mode)[realization.underlay]
    total = float(np.sum(admitted))
    assert np.all(admitted < mode.xi), (
        f"{realization!r}: admitted p-DUE above xi = {mode.xi:.3g} W"
    )
    assert total <= realization.n_dues * mode.xi
    logger.debug(
        "%r: mean interference at BS %.3g W, budget %.3g W",
        realization,
        total,
        realization.n_dues * mode.xi,
    )


def _nakagami_gain(rng: np.random.Generator, m: int) -> float:
    """ Unit-mean Gamma(m, 1/m) power gain """
    return float(rng.gamma(m, 1 / m))


def sir_at_bs(
    realization: Realization,
    config: NetworkConfig,
    fading: FadingSpec,
    rng: np.random.Generator,
) -> float:
    """
    SIR of the CUE uplink at the BS

    Args:
        realization (Realization)
        config (NetworkConfig)
        fading (FadingSpec)
        rng (np.random.Generator)
    Returns:
        (float): inf when no DUE interferes
    """
    mode = config.mode
    signal = _nakagami_gain(rng, fading.m_cellular) * mode.rho_bs
    gains = rng.exponential(1.0, realization.n_pdues)
    terms = gains * bs_interference_terms(realization, mode)
    interference = float(np.sum(terms[realization.underlay]))
    return math.inf if interference == 0 else signal / interference


def _tagged_pdue(
    d: float, config: NetworkConfig, rng: np.random.Generator
) -> np.ndarray:
    """ p-DUE of a tagged DRx at (d, 0), uniform within R_D of it and not
    confined to the cell """
    return np.array([d, 0.0]) + uniform_in_disk(
        rng, 1, config.geometry.d2d_range
    )[0]


def _tagged_admitted(
    pdue: np.ndarray, d: float, config: NetworkConfig
) -> bool:
    r_d = math.hypot(pdue[0] - d, pdue[1])
    r_c = math.hypot(pdue[0], pdue[1])
    return bool(is_underlay(r_d, r_c, config.mode))


def sir_at_tagged_drx(
    realization: Realization,
    d: float,
    config: NetworkConfig,
    fading: FadingSpec,
    rng: np.random.Generator,
) -> Optional[float]:
    """
    SIR at a tagged DRx placed at distance d from the BS, whose own p-DUE
    is drawn and tested for admission first

    Args:
        realization (Realization): the rest of the network
        d (float): distance of the tagged DRx to the BS
        config (NetworkConfig)
        fading (FadingSpec)
        rng (np.random.Generator)
    Returns:
        (Optional[float]): None when the tagged pair is refused, inf when
            nothing interferes
    """
    if not _tagged_admitted(_tagged_pdue(d, config, rng), d, config):
        return None
    mode = config.mode
    receiver = np.array([d, 0.0])
    signal = _nakagami_gain(rng, fading.m_d2d) * mode.rho_d

    cue_distance = float(np.hypot(*(realization.cue - receiver)))
    cue_power = mode.rho_bs * float(np.hypot(*realization.cue)) ** mode.alpha_c
    cue_term = (
        rng.exponential(1.0) * cue_power / cue_distance ** mode.alpha_d
        if cue_distance > 0
        else math.inf
    )

    gains = rng.exponential(1.0, realization.n_pdues)
    distances = np.hypot(*(realization.pdues - receiver).T)
    dues = realization.underlay
    with np.errstate(divide="ignore"):
        d2d_terms = (
            gains[dues]
            * mode.rho_d
            * realization.r_d[dues] ** mode.alpha_d
            / distances[dues] ** mode.alpha_d
        )
    interference = cue_term + float(np.sum(d2d_terms))
    return math.inf if interference == 0 else signal / interference


def count_successful_dues(
    realization: Realization,
    gamma: float,
    config: NetworkConfig,
    fading: FadingSpec,
    rng: np.random.Generator,
) -> int:
    """ Number of DUEs whose own DRx sees SIR >= gamma, with the CUE and
    every other DUE interfering """
    mode = config.mode
    dues = np.flatnonzero(realization.underlay)
    if dues.size == 0:
        return 0
    receivers = realization.drxs[dues]
    transmitters = realization.pdues[dues]
    powers = mode.rho_d * realization.r_d[dues] ** mode.alpha_d

    # distances[i, j]: DUE j to the DRx of DUE i
    distances = np.hypot(
        receivers[:, None, 0] - transmitters[None, :, 0],
        receivers[:, None, 1] - transmitters[None, :, 1],
    )
    np.fill_diagonal(distances, np.inf)
    gains = rng.exponential(1.0, distances.shape)
    with np.errstate(divide="ignore"):
        d2d = np.sum(gains * powers[None, :] / distances ** mode.alpha_d, 1)

    cue_power = mode.rho_bs * float(np.hypot(*realization.cue)) ** mode.alpha_c
    cue_distances = np.hypot(*(receivers - realization.cue).T)
    with np.errstate(divide="ignore"):
        cue = (
            rng.exponential(1.0, dues.size)
            * cue_power
            / cue_distances ** mode.alpha_d
        )
    signal = rng.gamma(fading.m_d2d, 1 / fading.m_d2d, dues.size) * mode.rho_d
    interference = d2d + cue
    with np.errstate(divide="ignore"):
        sir = np.where(interference > 0, signal / interference, np.inf)
    return int(np.count_nonzero(sir >= gamma))


class MonteCarloPlayground:
    """
    Runs realizations of the cell and keeps what every estimator needs.
    Realization i always draws from the stream (seed, i), so results do
    not depend on the number of workers

    Attributes:
        config (NetworkConfig)
        fading (FadingSpec)
        gamma (float): linear SIR threshold
        tagged_distance (float): distance of the tagged DRx to the BS
        confine_drx (bool): keep every DRx inside the cell
        seed (int): master seed
        workers (int): threads running realizations
        keep_realizations (bool): store sampled networks for dumping
        realizations (List[Realization])
        all_outages_bs (List[bool])
        all_tagged_admissions (List[bool])
        all_tagged_outages (List[bool]): one entry per admitted tagged DRx
        all_successes (List[int])
        all_dues (List[int])

    Methods:
        play_realization (index) -> RealizationOutcome
        play_multiple_realizations (N) -> None
        estimate (quantity) -> EstimatorResult
    """

    def __init__(
        self,
        config: NetworkConfig,
        fading: Optional[FadingSpec] = None,
        gamma: float = 1.0,
        tagged_distance: float = 250.0,
        confine_drx: bool = True,
        seed: int = MC_SEED,
        workers: int = 1,
        keep_realizations: bool = False,
        show_progress: bool = True,
    ) -> None:
        self.config = config
        self.fading = fading or FadingSpec()
        self.gamma = gamma
        self.tagged_distance = tagged_distance
        self.confine_drx = confine_drx
        self.seed = int(seed)
        self.workers = max(1, int(workers))
        self.keep_realizations = keep_realizations
        self.show_progress = show_progress
        self.realizations: List[Realization] = []
        self.all_outages_bs: List[bool] = []
        self.all_tagged_admissions: List[bool] = []
        self.all_tagged_outages: List[bool] = []
        self.all_successes: List[int] = []
        self.all_dues: List[int] = []

    def __repr__(self) -> str:
        return (
            f"MonteCarloPlayground(seed={self.seed}, "
            f"realizations={len(self.all_dues)}, gamma={self.gamma}, "
            f"tagged_distance={self.tagged_distance})"
        )

    def play_realization(self, index: int) -> RealizationOutcome:
        """ Samples realization `index` and evaluates every SIR on it """
        rng = realization_rng(self.seed, index)
        realization = sample_realization(
            self.config, rng, self.confine_drx, index, self.seed
        )
        outage_bs = sir_at_bs(realization, self.config, self.fading, rng) < (
            self.gamma
        )
        tagged_sir = sir_at_tagged_drx(
            realization, self.tagged_distance, self.config, self.fading, rng
        )
        successes = count_successful_dues(
            realization, self.gamma, self.config, self.fading, rng
        )
        return RealizationOutcome(
            realization=realization,
            outage_bs=bool(outage_bs),
            tagged_admitted=tagged_sir is not None,
            tagged_outage=None if tagged_sir is None else tagged_sir < self.gamma,
            successes=successes,
            dues=realization.n_dues,
        )

    def play_multiple_realizations(self, N: int = 100) -> None:
        """
        Plays realizations 0..N-1, replacing any stored results

        Args:
            N (int): number of realizations. Default = 100
        """
        if N < MC_MIN_REALIZATIONS:
            raise InsufficientSamplesError(
                f"{N} realizations requested, at least "
                f"{MC_MIN_REALIZATIONS} needed"
            )
        self.realizations = []
        self.all_outages_bs = []
        self.all_tagged_admissions = []
        self.all_tagged_outages = []
        self.all_successes = []
        self.all_dues = []

        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            progress_bar = tqdm(
                executor.map(self.play_realization, range(N)),
                total=N,
                disable=not self.show_progress,
            )
            for outcome in progress_bar:
                index = outcome.realization.index
                progress_bar.set_description(f"Realization {index + 1}")
                self._store(outcome)
        logger.debug("Played %d realizations with seed %d", N, self.seed)

    def _store(self, outcome: RealizationOutcome) -> None:
        if self.keep_realizations:
            self.realizations.append(outcome.realization)
        self.all_outages_bs.append(outcome.outage_bs)
        self.all_tagged_admissions.append(outcome.tagged_admitted)
        if outcome.tagged_outage is not None:
            self.all_tagged_outages.append(outcome.tagged_outage)
        self.all_successes.append(outcome.successes)
        self.all_dues.append(outcome.dues)

    def estimate(self, quantity: Union[Quantity, str]) -> EstimatorResult:
        """
        Estimate of a network quantity from the stored realizations

        Args:
            quantity (Union[Quantity, str])
        Raises:
            ValueError: for single-interferer MGFs and analytic-only names
            InsufficientSamplesError: if nothing has been played
        Returns:
            (EstimatorResult)
        """
        quantity = Quantity(quantity)
        if not self.all_dues:
            raise InsufficientSamplesError("No realizations played yet")
        if quantity is Quantity.OUTAGE_BS:
            return EstimatorResult.from_samples(self.all_outages_bs)
        if quantity is Quantity.OUTAGE_DRX_AT_D:
            return EstimatorResult.from_samples(self.all_tagged_outages)
        if quantity is Quantity.P_D2D:
            return EstimatorResult.from_samples(self.all_tagged_admissions)
        if quantity is Quantity.M_BAR:
            return EstimatorResult.from_samples(self.all_successes)
        if quantity is Quantity.M_BAR_D2D:
            return EstimatorResult.from_samples(self.all_dues)
        if quantity is Quantity.TAU:
            return EstimatorResult.from_ratio(self.all_successes, self.all_dues)
        if quantity is Quantity.TAU_PER_REALIZATION:
            return EstimatorResult.from_samples(
                successes / dues
                for successes, dues in zip(self.all_successes, self.all_dues)
                if dues > 0
            )
        raise ValueError(f"No network estimator for {quantity.value}")


def single_interferer_mgf_samples(
    quantity: Quantity,
    s: float,
    config: NetworkConfig,
    rng: np.random.Generator,
    n: int,
    d: float = 0.0,
) -> np.ndarray:
    """
    Samples of E[exp(-s I) | position] for one interferer placed as the
    MGF engine assumes: p-DUE uniform in the cell with its link length
    drawn from the 2 r / R_D^2 law, or the CUE uniform in the cell. The
    Rayleigh gain is averaged out exactly, leaving 1 / (1 + s I)

    Args:
        quantity (Quantity): one of the mgf_* quantities
        s (float): Laplace variable
        config (NetworkConfig)
        rng (np.random.Generator)
        n (int): number of samples
        d (float): receiver distance to the BS, unused at the BS
    Returns:
        (np.ndarray)
    """
    geom, mode = config.geometry, config.mode
    positions = uniform_in_disk(rng, n, geom.radius)
    r_c = np.hypot(positions[:, 0], positions[:, 1])
    if quantity is Quantity.MGF_CUE_DRX:
        to_receiver = np.hypot(positions[:, 0] - d, positions[:, 1])
        with np.errstate(divide="ignore"):
            interference = (
                mode.rho_bs * r_c ** mode.alpha_c / to_receiver ** mode.alpha_d
            )
    else:
        r_d = geom.d2d_range * np.sqrt(rng.random(n))
        admitted = np.asarray(is_underlay(r_d, r_c, mode), dtype=bool)
        power = mode.rho_d * r_d ** mode.alpha_d
        if quantity is Quantity.MGF_SINGLE_BS:
            interference = power / r_c ** mode.alpha_c
        elif quantity is Quantity.MGF_SINGLE_DRX:
            to_receiver = np.hypot(positions[:, 0] - d, positions[:, 1])
            with np.errstate(divide="ignore"):
                interference = power / to_receiver ** mode.alpha_d
        else:
            raise ValueError(f"{quantity.value} is not a single-interferer MGF")
        interference = np.where(admitted, interference, 0.0)
    with np.errstate(over="ignore"):
        return 1 / (1 + s * interference)


def estimate_metric(
    quantity: Union[Quantity, str],
    config: NetworkConfig,
    fading: Optional[FadingSpec] = None,
    n_realizations: int = 10000,
    seed: int = MC_SEED,
    gamma: float = 1.0,
    d: float = 250.0,
    s: Optional[float] = None,
    confine_drx: bool = True,
    workers: int = 1,
    show_progress: bool = False,
) -> EstimatorResult:
    """
    Monte Carlo estimate of one quantity

    Args:
        quantity (Union[Quantity, str]): any network quantity or one of
            the single-interferer MGFs
        config (NetworkConfig)
        fading (FadingSpec)
        n_realizations (int): realizations, or MGF samples, >= 100
        seed (int): master seed
        gamma (float): linear SIR threshold
        d (float): distance of the tagged DRx to the BS
        s (float): Laplace variable, required for MGF quantities
        confine_drx (bool)
        workers (int)
        show_progress (bool)
    Raises:
        InsufficientSamplesError: below 100 realizations
    Returns:
        (EstimatorResult)
    """
    quantity = Quantity(quantity)
    if n_realizations < MC_MIN_REALIZATIONS:
        raise InsufficientSamplesError(
            f"{n_realizations} realizations requested, at least "
            f"{MC_MIN_REALIZATIONS} needed"
        )
    if quantity in (
        Quantity.MGF_SINGLE_BS,
        Quantity.MGF_SINGLE_DRX,
        Quantity.MGF_CUE_DRX,
    ):
        if s is None:
            raise ValueError(f"{quantity.value} needs the Laplace variable s")
        chunks = []
        for index, start in enumerate(range(0, n_realizations, MGF_CHUNK)):
            size = min(MGF_CHUNK, n_realizations - start)
            chunks.append(
                single_interferer_mgf_samples(
                    quantity, s, config, realization_rng(seed, index), size, d
                )
            )
        return EstimatorResult.from_samples(np.concatenate(chunks))

    playground = MonteCarloPlayground(
        config,
        fading,
        gamma=gamma,
        tagged_distance=d,
        confine_drx=confine_drx,
        seed=seed,
        workers=workers,
        show_progress=show_progress,
    )
    playground.play_multiple_realizations(n_realizations)
    return playground.estimate(quantity)


def dump_realizations(
    realizations: Iterable[Realization], path: Union[str, Path]
) -> int:
    """
    Writes realizations as JSON lines, one realization per line

    Returns:
        (int): number of lines written
    """
    count = 0
    with open(path, "w") as f:
        for realization in realizations:
            f.write(json.dumps(realization.to_record()) + "\n")
            count += 1
    logger.info("Wrote %d realizations to %s", count, path)
    return count


def load_realizations(path: Union[str, Path]) -> List[Realization]:
    """ Reads realizations written by dump_realizations """
    with open(path) as f:
        return [
            Realization.from_record(json.loads(line))
            for line in f
            if line.strip()
        ]
