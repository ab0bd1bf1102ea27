"""Dataset generation, training runs, Fourier / expressibility analysis,
and the sample-size and amplitude sweeps.

All randomness flows through numpy's Philox counter-based generator keyed
by explicit seeds, so every record is bit-reproducible from its config
snapshot (and datasets are reproducible across languages that ship Philox).
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .model import ModelFunction, ModelSpec
from .neldermead import NmConfig, OptimTrace, minimize

TARGET_FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "gaussian": lambda x: np.exp(-36.0 * np.asarray(x) ** 2),
    "abs": lambda x: np.abs(np.asarray(x)),
    # the boundary |x| = 0.4 belongs to the outer region
    "square-wave": lambda x: np.where(np.abs(np.asarray(x)) < 0.4, 1.0, 0.0),
    "two-sines": lambda x: 0.4 * np.sin(4 * np.pi * np.asarray(x))
    + 0.5 * np.sin(6 * np.pi * np.asarray(x)),
}

DEFAULT_N_SWEEP = (10, 30, 100, 300, 1000)
DEFAULT_ALPHA_SWEEP = (1.0, 3.0, 5.0)

_trapezoid = getattr(np, "trapezoid", None) or np.trapz  # numpy < 2.0 name


def target_function(target: str | Callable) -> Callable[[np.ndarray], np.ndarray]:
    if callable(target):
        return target
    try:
        return TARGET_FUNCTIONS[target]
    except KeyError:
        raise ValueError(
            f"unknown target {target!r}; choose from {sorted(TARGET_FUNCTIONS)} or pass a callable"
        ) from None


@dataclass(frozen=True)
class Dataset:
    """Training pairs (x_m, y_m) with the seed that generated them."""

    xs: np.ndarray
    ys: np.ndarray
    target: str
    seed: int | None = None

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.shape[0] != ys.shape[0]:
            raise ValueError("xs and ys lengths differ")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def n(self) -> int:
        return self.xs.shape[0]


def generate_dataset(target: str | Callable, n: int, seed: int) -> Dataset:
    """x_m i.i.d. uniform on [-1, 1] from Philox(seed); y_m = f(x_m)."""
    if n < 1:
        raise ValueError("dataset size must be >= 1")
    f = target_function(target)
    rng = np.random.Generator(np.random.Philox(seed))
    xs = rng.uniform(-1.0, 1.0, n)
    ys = np.asarray(f(xs), dtype=float)
    name = target if isinstance(target, str) else "custom"
    return Dataset(xs=xs, ys=ys, target=name, seed=seed)


@dataclass(frozen=True)
class ThetaInit:
    """Initialization rule: each coordinate uniform on [low, high] from
    Philox(seed)."""

    seed: int = 0
    low: float = -1.0
    high: float = 1.0

    def draw(self, n: int) -> np.ndarray:
        rng = np.random.Generator(np.random.Philox(self.seed))
        return rng.uniform(self.low, self.high, n)


@dataclass(frozen=True)
class AnalysisConfig:
    """Grid sizes for the fit curve, the quadrature, and the held-out MSE."""

    fit_grid_points: int = 401
    quadrature_points: int = 401
    nu_max: float = 15.0
    nu_step: float = 0.25
    test_grid_points: int = 1000
    spectrum: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelSpec
    target: str = "gaussian"
    n_samples: int = 100
    dataset_seed: int = 0
    theta_init: ThetaInit = field(default_factory=ThetaInit)
    theta0: tuple[float, ...] | None = None  # explicit start overrides theta_init
    optimizer: NmConfig = field(default_factory=NmConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.theta0 is not None:
            theta0 = tuple(float(v) for v in self.theta0)
            if len(theta0) != self.model.n_parameters:
                raise ValueError(
                    f"theta0 has length {len(theta0)}, model needs {self.model.n_parameters}"
                )
            object.__setattr__(self, "theta0", theta0)

    def initial_theta(self) -> np.ndarray:
        if self.theta0 is not None:
            return np.asarray(self.theta0, dtype=float)
        return self.theta_init.draw(self.model.n_parameters)


@dataclass(frozen=True)
class Spectrum:
    """Sampled Fourier transform F(nu) = (2 pi)^{-1/2} int_{-1}^{1} F(x)
    e^{-2 pi i nu x} dx."""

    nu: np.ndarray
    values: np.ndarray

    @property
    def amplitude(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def phase(self) -> np.ndarray:
        return np.angle(self.values)


def fourier_transform_numeric(
    curve: Callable[[np.ndarray], np.ndarray] | np.ndarray,
    nu: Sequence[float] | None = None,
    x_grid: np.ndarray | None = None,
    num_points: int = 401,
) -> Spectrum:
    """Composite-trapezoid transform of a curve on [-1, 1].

    ``curve`` is a callable sampled on ``x_grid`` (default: uniform grid of
    ``num_points``), or an array of samples aligned with ``x_grid``.
    """
    if x_grid is None:
        x_grid = np.linspace(-1.0, 1.0, num_points)
    else:
        x_grid = np.asarray(x_grid, dtype=float)
    if x_grid.size < 2:
        raise ValueError("quadrature grid needs at least two points")
    if callable(curve):
        values = np.asarray(curve(x_grid), dtype=complex)
    else:
        values = np.asarray(curve, dtype=complex)
        if values.shape != x_grid.shape:
            raise ValueError("sampled curve length does not match the x grid")
    if nu is None:
        nu = np.arange(0.0, 15.0 + 1e-12, 0.25)
    nu = np.asarray(nu, dtype=float)
    kernel = np.exp(-2j * np.pi * np.outer(nu, x_grid))
    vals = _trapezoid(kernel * values[None, :], x_grid, axis=1) / np.sqrt(2 * np.pi)
    return Spectrum(nu=nu, values=vals)


def half_integer_frequencies(nu_max: float = 15.0) -> np.ndarray:
    return np.arange(0.0, nu_max + 1e-12, 0.5)


def spectral_support(
    spec: ModelSpec | ModelFunction,
    thetas: Iterable[np.ndarray],
    threshold: float,
    nu_max: float = 15.0,
    num_points: int = 401,
) -> float:
    """Median over theta samples of the largest frequency with |F(nu)| above
    threshold.

    The transform is sampled on the half-integer grid nu = 0, 0.5, 1, ...,
    where it isolates the model's e^{i pi m x} components exactly; off-grid
    samples of the transform carry sinc leakage from strong low-frequency
    components and would swamp small thresholds.
    """
    model = spec if isinstance(spec, ModelFunction) else ModelFunction(spec)
    nu = half_integer_frequencies(nu_max)
    supports = []
    for theta in thetas:
        s = fourier_transform_numeric(
            lambda xs: model.curve(xs, theta), nu=nu, num_points=num_points
        )
        above = nu[s.amplitude > threshold]
        supports.append(float(above.max()) if above.size else 0.0)
    if not supports:
        raise ValueError("spectral_support needs at least one theta sample")
    return float(np.median(supports))


def held_out_grid(points: int = 1000) -> np.ndarray:
    """Deterministic uniform evaluation grid on [-1, 1]."""
    return np.linspace(-1.0, 1.0, points)


@dataclass(frozen=True)
class TrainingRecord:
    """One training run: config snapshot, optimizer trace, final parameters,
    the dense fit curve, held-out MSE, and (optionally) the spectrum."""

    config: ExperimentConfig
    trace: OptimTrace
    final_theta: np.ndarray
    final_cost: float
    test_mse: float
    fit_x: np.ndarray
    fit_f: np.ndarray
    spectrum: Spectrum | None
    elapsed_seconds: float

    @property
    def train_mse(self) -> float:
        return self.final_cost


# threadpoolctl limits are process-wide; reference-count them so parallel
# runs can each request single-threaded BLAS without fighting on exit.
_blas_lock = threading.Lock()
_blas_depth = 0
_blas_controller = None


class _single_threaded_blas:
    def __enter__(self):
        global _blas_depth, _blas_controller
        with _blas_lock:
            _blas_depth += 1
            if _blas_depth == 1:
                _blas_controller = threadpool_limits(limits=1, user_api="blas")
        return self

    def __exit__(self, *exc):
        global _blas_depth, _blas_controller
        with _blas_lock:
            _blas_depth -= 1
            if _blas_depth == 0 and _blas_controller is not None:
                _blas_controller.unregister()
                _blas_controller = None
        return False


def train(config: ExperimentConfig) -> TrainingRecord:
    """Minimize the MSE cost over theta and fill a TrainingRecord."""
    t0 = time.perf_counter()
    if config.model.variant == "multi-input-single-kpo" or config.model.num_inputs != 1:
        raise ValueError("the training pipeline generates scalar-input datasets; "
                         "multi-input models are evaluated through ModelFunction")
    model = ModelFunction(config.model)
    dataset = generate_dataset(config.target, config.n_samples, config.dataset_seed)
    theta0 = config.initial_theta()
    if theta0.shape != (model.n_parameters,):
        raise ValueError(
            f"theta0 has shape {theta0.shape}, model needs ({model.n_parameters},)"
        )
    cost = model.cost_function(dataset.xs, dataset.ys)
    with _single_threaded_blas():
        trace = minimize(cost, theta0, config.optimizer)

        final_cost = model.mse(trace.final_theta, dataset.xs, dataset.ys)
        fit_x = np.linspace(-1.0, 1.0, config.analysis.fit_grid_points)
        fit_f = model.curve(fit_x, trace.final_theta)

        grid = held_out_grid(config.analysis.test_grid_points)
        truth = target_function(config.target)(grid)
        test_mse = float(np.mean((model.curve(grid, trace.final_theta) - truth) ** 2))

        spectrum = None
        if config.analysis.spectrum:
            nu = np.arange(0.0, config.analysis.nu_max + 1e-12, config.analysis.nu_step)
            spectrum = fourier_transform_numeric(
                lambda xs: model.curve(xs, trace.final_theta),
                nu=nu,
                num_points=config.analysis.quadrature_points,
            )
    return TrainingRecord(
        config=config,
        trace=trace,
        final_theta=trace.final_theta,
        final_cost=final_cost,
        test_mse=test_mse,
        fit_x=fit_x,
        fit_f=np.asarray(fit_f),
        spectrum=spectrum,
        elapsed_seconds=time.perf_counter() - t0,
    )


def _run_many(configs: Sequence[ExperimentConfig], jobs: int = 1) -> list[TrainingRecord]:
    if jobs <= 1 or len(configs) <= 1:
        return [train(c) for c in configs]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(train, configs))


def train_best_of(
    config: ExperimentConfig, theta_seeds: Sequence[int], jobs: int = 1
) -> list[TrainingRecord]:
    """One run per theta seed (dataset fixed); records in seed order."""
    configs = [
        replace(config, theta_init=replace(config.theta_init, seed=s), theta0=None)
        for s in theta_seeds
    ]
    return _run_many(configs, jobs)


def best_record(records: Iterable[TrainingRecord]) -> TrainingRecord:
    return min(records, key=lambda r: r.final_cost)


def sweep_sample_size(
    config: ExperimentConfig,
    n_list: Sequence[int] = DEFAULT_N_SWEEP,
    jobs: int = 1,
) -> list[TrainingRecord]:
    """Retrain per dataset size; held-out MSE always uses the independent
    uniform grid of the analysis config."""
    configs = [replace(config, n_samples=int(n)) for n in n_list]
    return _run_many(configs, jobs)


def alpha_cutoff(alpha: float) -> int:
    """Fock cutoff for a given initial amplitude: 25 covers mean photon
    numbers up to 9; alpha = 5 (mean 25) needs 100."""
    return 25 if abs(alpha) ** 2 <= 9.0 else 100


def sweep_alpha(
    config: ExperimentConfig,
    alpha_list: Sequence[float] = DEFAULT_ALPHA_SWEEP,
    jobs: int = 1,
) -> list[TrainingRecord]:
    """Retrain per initial coherent amplitude (single-KPO variant), with the
    cutoff promoted alongside alpha; spectra are attached."""
    if config.model.variant != "single-kpo":
        raise ValueError("the amplitude sweep is defined for the single-KPO variant")
    configs = []
    for alpha in alpha_list:
        model = replace(
            config.model, alpha=(complex(alpha),), cutoff=(alpha_cutoff(alpha),)
        )
        analysis = replace(config.analysis, spectrum=True)
        configs.append(replace(config, model=model, analysis=analysis))
    return _run_many(configs, jobs)
