"""Simulation harness: polynomial data, scaling, training, fidelity metrics.

One experiment draws a dataset from a random polynomial, splits it, fits a
min-max scaling on the train split only, trains a network on the scaled
data, converts the weights into a polynomial, and measures how closely the
polynomial tracks the network on the scaled test split.  Batches sweep
(activation x scaling x hidden units x series order) with independent seeds
per repetition and export deterministic CSV tables.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import nn, transcode
from .nn import NetworkWeights, TrainConfig, TrainTrace
from .poly import Polynomial, monomials_up_to, ols_fit
from .transcode import TranscodeResult

SCALING_MODES = ("unit", "symmetric", "none")


def mse(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.mean((a - b) ** 2))


# ---------------------------------------------------------------------------
# data generation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DataGenConfig:
    """Synthetic regression data from a random polynomial.

    Features are independent normals with per-feature means drawn once from
    U(mean_lo, mean_hi); the response is a random polynomial of the given
    degree (coefficients from U(coeff_lo, coeff_hi)) plus centered normal
    noise.
    """

    n: int = 200
    p: int = 3
    degree: int = 2
    mean_lo: float = -10.0
    mean_hi: float = 10.0
    feature_variance: float = 1.0
    coeff_lo: float = -5.0
    coeff_hi: float = 5.0
    noise_sd: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 samples, got {self.n}")
        if self.feature_variance <= 0:
            raise ValueError("feature variance must be positive")
        if self.noise_sd < 0:
            raise ValueError("noise standard deviation cannot be negative")


def generate_data(cfg: DataGenConfig) -> tuple[np.ndarray, np.ndarray, Polynomial]:
    """Draw (X, y) and return the generating polynomial alongside.

    Draw order is fixed (means, features, coefficients, noise) so a seed
    pins the dataset bit for bit.
    """
    rng = np.random.default_rng(cfg.seed)
    mu = rng.uniform(cfg.mean_lo, cfg.mean_hi, size=cfg.p)
    X = rng.normal(mu, math.sqrt(cfg.feature_variance), size=(cfg.n, cfg.p))
    monos = monomials_up_to(cfg.p, cfg.degree)
    betas = rng.uniform(cfg.coeff_lo, cfg.coeff_hi, size=len(monos))
    gen = Polynomial(p=cfg.p, degree=cfg.degree, coeffs=dict(zip(monos, betas)))
    y = gen.evaluate_many(X) + rng.normal(0.0, cfg.noise_sd, size=cfg.n)
    return X, y, gen


def split(
    X: np.ndarray, y: np.ndarray, fraction: float, seed: int
) -> tuple[tuple[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]:
    """Random train/test split; train gets round(n * fraction) samples."""
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"train fraction must be in (0, 1), got {fraction}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    perm = np.random.default_rng(seed).permutation(n)
    k = int(round(n * fraction))
    tr, te = perm[:k], perm[k:]
    return (X[tr], y[tr]), (X[te], y[te])


# ---------------------------------------------------------------------------
# scaling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingSpec:
    """Min-max affine maps fitted on the train split, applied everywhere.

    mode "unit" targets [0, 1], "symmetric" targets [-1, 1], "none" is the
    identity.  The response is scaled with the same mode as the features.
    """

    mode: str
    x_min: np.ndarray
    x_max: np.ndarray
    y_min: float
    y_max: float

    def __post_init__(self):
        if self.mode not in SCALING_MODES:
            raise ValueError(f"unknown scaling mode {self.mode!r}; expected one of {SCALING_MODES}")
        x_min = np.asarray(self.x_min, dtype=float)
        x_max = np.asarray(self.x_max, dtype=float)
        if self.mode != "none":
            if np.any(x_max <= x_min):
                bad = int(np.argmax(x_max <= x_min))
                raise ValueError(f"feature {bad} is constant on the train split")
            if self.y_max <= self.y_min:
                raise ValueError("response is constant on the train split")
        x_min.flags.writeable = False
        x_max.flags.writeable = False
        object.__setattr__(self, "x_min", x_min)
        object.__setattr__(self, "x_max", x_max)

    def _maps(self, lo, hi):
        # scaled = shift + scale * original
        if self.mode == "none":
            return np.zeros_like(np.asarray(lo, dtype=float)), np.ones_like(
                np.asarray(lo, dtype=float)
            )
        span = np.asarray(hi, dtype=float) - np.asarray(lo, dtype=float)
        if self.mode == "unit":
            return -np.asarray(lo, dtype=float) / span, 1.0 / span
        return -2.0 * np.asarray(lo, dtype=float) / span - 1.0, 2.0 / span

    def input_affine(self, p: int) -> tuple[np.ndarray, np.ndarray]:
        """(shift, scale) with x_scaled = shift + scale * x_original."""
        if p != self.x_min.shape[0]:
            raise ValueError(f"scaling fitted for {self.x_min.shape[0]} features, got {p}")
        return self._maps(self.x_min, self.x_max)

    def response_affine(self) -> tuple[float, float]:
        """(shift, scale) with y_scaled = shift + scale * y_original."""
        a, b = self._maps(np.array([self.y_min]), np.array([self.y_max]))
        return float(a[0]), float(b[0])

    def response_affine_inverse(self) -> tuple[float, float]:
        """(mult, add) with y_original = mult * y_scaled + add."""
        a, b = self.response_affine()
        return 1.0 / b, -a / b

    def apply_x(self, X: np.ndarray) -> np.ndarray:
        a, b = self.input_affine(np.asarray(X).shape[1])
        return a[None, :] + np.asarray(X, dtype=float) * b[None, :]

    def apply_y(self, y: np.ndarray) -> np.ndarray:
        a, b = self.response_affine()
        return a + np.asarray(y, dtype=float) * b

    def invert_x(self, Xs: np.ndarray) -> np.ndarray:
        a, b = self.input_affine(np.asarray(Xs).shape[1])
        return (np.asarray(Xs, dtype=float) - a[None, :]) / b[None, :]

    def invert_y(self, ys: np.ndarray) -> np.ndarray:
        mult, add = self.response_affine_inverse()
        return np.asarray(ys, dtype=float) * mult + add


def fit_scaling(X_train: np.ndarray, y_train: np.ndarray, mode: str) -> ScalingSpec:
    """Record train-split extrema; test data never influences the maps."""
    X_train = np.asarray(X_train, dtype=float)
    y_train = np.asarray(y_train, dtype=float)
    return ScalingSpec(
        mode=mode,
        x_min=X_train.min(axis=0),
        x_max=X_train.max(axis=0),
        y_min=float(y_train.min()),
        y_max=float(y_train.max()),
    )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_scaling(spec: ScalingSpec, path) -> None:
    lines = [
        "{",
        f'  "mode": "{spec.mode}",',
        f'  "x_min": [{", ".join(_fmt(v) for v in spec.x_min)}],',
        f'  "x_max": [{", ".join(_fmt(v) for v in spec.x_max)}],',
        f'  "y_min": {_fmt(spec.y_min)},',
        f'  "y_max": {_fmt(spec.y_max)}',
        "}",
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_scaling(path) -> ScalingSpec:
    import json

    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ValueError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
    for name in ("mode", "x_min", "x_max", "y_min", "y_max"):
        if name not in doc:
            raise ValueError(f"{path}: missing field '{name}'")
    try:
        return ScalingSpec(
            mode=doc["mode"],
            x_min=np.asarray(doc["x_min"], dtype=float),
            x_max=np.asarray(doc["x_max"], dtype=float),
            y_min=float(doc["y_min"]),
            y_max=float(doc["y_max"]),
        )
    except ValueError as e:
        raise ValueError(f"{path}: {e}") from e


# ---------------------------------------------------------------------------
# single experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """One pipeline run: data recipe, architecture, scaling, series order.

    ``seed`` drives everything; sub-streams for data, split and training are
    derived from it.  Setting ``data_seed`` pins the dataset and split while
    ``seed`` keeps varying the training initialization (fixed-data design).
    """

    data: DataGenConfig = field(default_factory=DataGenConfig)
    activation: str = "softplus"
    scaling: str = "symmetric"
    h1: int = 4
    q: int = 3
    train_fraction: float = 0.75
    coverage_epsilon: float = 0.1
    seed: int = 0
    data_seed: int | None = None
    train: TrainConfig = field(default_factory=TrainConfig)


@dataclass(frozen=True)
class ExperimentRecord:
    """Measured outcome of one run; wall_time is excluded from CSV exports."""

    activation: str
    scaling: str
    h1: int
    q: int
    rep: int
    seed: int
    mse_nn_pr: float
    mse_nn_y: float
    nn_pred_var: float
    coverage: float
    w_mean_abs: float
    w_max_abs: float
    v_max_abs: float
    epochs: int
    converged: bool
    wall_time: float

    def __post_init__(self):
        if self.mse_nn_pr < 0 or self.mse_nn_y < 0:
            raise ValueError("mean squared errors cannot be negative")


@dataclass(frozen=True)
class PipelineResult:
    """Full artifacts of one run, for studies that need more than the record."""

    config: ExperimentConfig
    generating_poly: Polynomial
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    scaling_spec: ScalingSpec
    weights: NetworkWeights
    trace: TrainTrace
    transcoded: TranscodeResult
    nn_test: np.ndarray
    pr_test: np.ndarray
    record: ExperimentRecord


def derive_seeds(seed: int) -> tuple[int, int, int]:
    """Independent (data, split, train) seeds from one run seed."""
    children = np.random.SeedSequence(seed).spawn(3)
    return tuple(int(c.generate_state(1)[0]) for c in children)


@dataclass(frozen=True)
class _Trained:
    config: ExperimentConfig
    generating_poly: Polynomial
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    scaling_spec: ScalingSpec
    Xs_train: np.ndarray
    ys_train: np.ndarray
    Xs_test: np.ndarray
    ys_test: np.ndarray
    weights: NetworkWeights
    trace: TrainTrace
    train_seconds: float


def _train_stage(cfg: ExperimentConfig) -> _Trained:
    data_seed, split_seed, train_seed = derive_seeds(cfg.seed)
    if cfg.data_seed is not None:
        data_seed, split_seed, _ = derive_seeds(cfg.data_seed)

    X, y, gen = generate_data(replace(cfg.data, seed=data_seed))
    (X_tr, y_tr), (X_te, y_te) = split(X, y, cfg.train_fraction, split_seed)
    scaling = fit_scaling(X_tr, y_tr, cfg.scaling)
    Xs_tr, ys_tr = scaling.apply_x(X_tr), scaling.apply_y(y_tr)
    Xs_te, ys_te = scaling.apply_x(X_te), scaling.apply_y(y_te)

    t0 = time.perf_counter()
    wts, trace = nn.train_rprop(
        Xs_tr, ys_tr, cfg.h1, cfg.activation, replace(cfg.train, seed=train_seed)
    )
    return _Trained(
        config=cfg,
        generating_poly=gen,
        X_train=X_tr,
        y_train=y_tr,
        X_test=X_te,
        y_test=y_te,
        scaling_spec=scaling,
        Xs_train=Xs_tr,
        ys_train=ys_tr,
        Xs_test=Xs_te,
        ys_test=ys_te,
        weights=wts,
        trace=trace,
        train_seconds=time.perf_counter() - t0,
    )


def _measure_stage(trained: _Trained, q: int, rep: int = 0) -> PipelineResult:
    cfg = trained.config
    t0 = time.perf_counter()
    result = transcode.nn_to_poly(trained.weights, q)
    nn_pred = nn.predict(trained.weights, trained.Xs_test)
    pr_pred = result.poly.evaluate_many(trained.Xs_test)
    cov = transcode.coverage(trained.weights, trained.Xs_test, q, cfg.coverage_epsilon)
    w1 = trained.weights.w
    record = ExperimentRecord(
        activation=cfg.activation,
        scaling=cfg.scaling,
        h1=cfg.h1,
        q=q,
        rep=rep,
        seed=cfg.seed,
        mse_nn_pr=mse(nn_pred, pr_pred),
        mse_nn_y=mse(nn_pred, trained.ys_test),
        nn_pred_var=float(np.var(nn_pred)),
        coverage=cov.overall,
        w_mean_abs=float(np.mean(np.abs(w1))),
        w_max_abs=float(np.max(np.abs(w1))),
        v_max_abs=float(np.max(np.abs(trained.weights.v))),
        epochs=trained.trace.epochs,
        converged=trained.trace.converged,
        wall_time=trained.train_seconds + (time.perf_counter() - t0),
    )
    return PipelineResult(
        config=replace(cfg, q=q),
        generating_poly=trained.generating_poly,
        X_train=trained.X_train,
        y_train=trained.y_train,
        X_test=trained.X_test,
        y_test=trained.y_test,
        scaling_spec=trained.scaling_spec,
        weights=trained.weights,
        trace=trained.trace,
        transcoded=result,
        nn_test=nn_pred,
        pr_test=pr_pred,
        record=record,
    )


def run_pipeline(cfg: ExperimentConfig) -> PipelineResult:
    """generate -> split -> scale (train-only) -> train -> transcode -> measure."""
    return _measure_stage(_train_stage(cfg), cfg.q)


def run_experiment(cfg: ExperimentConfig) -> ExperimentRecord:
    """Like run_pipeline but returning only the measured record."""
    return run_pipeline(cfg).record


# ---------------------------------------------------------------------------
# batches
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BatchGrid:
    """Axes of a sweep; every combination is run ``reps`` times."""

    activations: tuple[str, ...] = ("softplus", "tanh", "sigmoid")
    scalings: tuple[str, ...] = ("unit", "symmetric")
    h1_values: tuple[int, ...] = (4, 10)
    q_values: tuple[int, ...] = (3, 5, 7)


@dataclass(frozen=True)
class BatchFailure:
    activation: str
    scaling: str
    h1: int
    rep: int
    seed: int
    message: str


@dataclass(frozen=True)
class BatchResult:
    records: tuple[ExperimentRecord, ...]
    failures: tuple[BatchFailure, ...]


def run_batch(
    data: DataGenConfig,
    grid: BatchGrid,
    reps: int,
    base_seed: int,
    train: TrainConfig = TrainConfig(),
    train_fraction: float = 0.75,
    coverage_epsilon: float = 0.1,
    fixed_data: bool = False,
) -> BatchResult:
    """Sweep the grid with ``reps`` repetitions per cell.

    Run seeds are base_seed XOR a global repetition index, so the whole
    table is a pure function of (config, base_seed).  Training does not
    depend on the series order, so one trained network per repetition
    serves every q in the grid; records still carry one row per (cell, q).
    With ``fixed_data`` every run shares the dataset and split pinned by
    ``base_seed`` and only the training initialization varies.  Training
    failures are recorded and the batch continues.
    """
    if reps < 1:
        raise ValueError(f"repetitions must be at least 1, got {reps}")
    unit_cells = sorted(product(grid.activations, grid.scalings, grid.h1_values))
    qs = sorted(grid.q_values)
    records: list[ExperimentRecord] = []
    failures: list[BatchFailure] = []
    for ci, (act, sc, h1) in enumerate(unit_cells):
        for rep in range(reps):
            run_seed = base_seed ^ (ci * reps + rep)
            cfg = ExperimentConfig(
                data=data,
                activation=act,
                scaling=sc,
                h1=h1,
                q=qs[0],
                train_fraction=train_fraction,
                coverage_epsilon=coverage_epsilon,
                seed=run_seed,
                data_seed=base_seed if fixed_data else None,
                train=train,
            )
            try:
                trained = _train_stage(cfg)
            except RuntimeError as e:
                failures.append(
                    BatchFailure(
                        activation=act, scaling=sc, h1=h1, rep=rep, seed=run_seed, message=str(e)
                    )
                )
                continue
            for q in qs:
                records.append(_measure_stage(trained, q, rep=rep).record)
    records.sort(key=lambda r: (r.activation, r.scaling, r.h1, r.q, r.rep))
    return BatchResult(records=tuple(records), failures=tuple(failures))


RECORD_COLUMNS = (
    "activation",
    "scaling",
    "h1",
    "q",
    "rep",
    "seed",
    "mse_nn_pr",
    "mse_nn_y",
    "nn_pred_var",
    "coverage",
    "w_mean_abs",
    "w_max_abs",
    "v_max_abs",
    "epochs",
    "converged",
)


def records_to_csv(records) -> str:
    """One row per run, fixed columns; wall time is deliberately omitted so
    identical seeds reproduce the file byte for byte."""
    lines = [",".join(RECORD_COLUMNS)]
    for r in records:
        lines.append(
            ",".join(
                [
                    r.activation,
                    r.scaling,
                    str(r.h1),
                    str(r.q),
                    str(r.rep),
                    str(r.seed),
                    _fmt(r.mse_nn_pr),
                    _fmt(r.mse_nn_y),
                    _fmt(r.nn_pred_var),
                    _fmt(r.coverage),
                    _fmt(r.w_mean_abs),
                    _fmt(r.w_max_abs),
                    _fmt(r.v_max_abs),
                    str(r.epochs),
                    str(int(r.converged)),
                ]
            )
        )
    return "\n".join(lines) + "\n"


SUMMARY_COLUMNS = (
    "activation",
    "scaling",
    "h1",
    "q",
    "runs",
    "mse_nn_pr_q10",
    "mse_nn_pr_q50",
    "mse_nn_pr_q90",
    "coverage_q50",
    "w_mean_abs_q50",
)


def summary_to_csv(records) -> str:
    """Per-cell quantiles (q10/q50/q90) of the network-vs-polynomial MSE."""
    cells: dict[tuple, list[ExperimentRecord]] = {}
    for r in records:
        cells.setdefault((r.activation, r.scaling, r.h1, r.q), []).append(r)
    lines = [",".join(SUMMARY_COLUMNS)]
    for key in sorted(cells):
        rs = cells[key]
        m = np.array([r.mse_nn_pr for r in rs])
        q10, q50, q90 = np.quantile(m, [0.1, 0.5, 0.9])
        cov50 = float(np.median([r.coverage for r in rs]))
        w50 = float(np.median([r.w_mean_abs for r in rs]))
        lines.append(
            ",".join(
                [
                    key[0],
                    key[1],
                    str(key[2]),
                    str(key[3]),
                    str(len(rs)),
                    _fmt(q10),
                    _fmt(q50),
                    _fmt(q90),
                    _fmt(cov50),
                    _fmt(w50),
                ]
            )
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# surfaces
# ---------------------------------------------------------------------------


def data_box(X: np.ndarray) -> tuple[float, float, float, float]:
    """Bounding box (x1_lo, x1_hi, x2_lo, x2_hi) of two-column data."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != 2:
        raise ValueError(f"expected (n, 2) data, got shape {X.shape}")
    return (
        float(X[:, 0].min()),
        float(X[:, 0].max()),
        float(X[:, 1].min()),
        float(X[:, 1].max()),
    )


def expand_box(box, factor: float) -> tuple[float, float, float, float]:
    """Scale a box about its center."""
    x1lo, x1hi, x2lo, x2hi = box
    c1, c2 = 0.5 * (x1lo + x1hi), 0.5 * (x2lo + x2hi)
    h1, h2 = 0.5 * factor * (x1hi - x1lo), 0.5 * factor * (x2hi - x2lo)
    return (c1 - h1, c1 + h1, c2 - h2, c2 + h2)


def surface_grid(poly: Polynomial, bounds, resolution: int) -> np.ndarray:
    """Row-major (x1, x2, z) table over a resolution^2 lattice."""
    if poly.p != 2:
        raise ValueError(f"surface grids need a 2-variable polynomial, got p={poly.p}")
    if resolution < 2:
        raise ValueError(f"resolution must be at least 2, got {resolution}")
    x1lo, x1hi, x2lo, x2hi = bounds
    xs1 = np.linspace(x1lo, x1hi, resolution)
    xs2 = np.linspace(x2lo, x2hi, resolution)
    pts = np.array([(a, b) for a in xs1 for b in xs2])
    z = poly.evaluate_many(pts)
    return np.column_stack([pts, z])


def grid_to_csv(grid: np.ndarray) -> str:
    lines = ["x1,x2,z"]
    for row in np.asarray(grid, dtype=float):
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SurfaceStudyConfig:
    """Fixed-data comparison of generating, least-squares and network polynomials."""

    data: DataGenConfig
    activation: str = "softplus"
    scaling: str = "symmetric"
    h1: int = 4
    q: int = 2
    seeds: tuple[int, ...] = (1, 2, 3, 4)
    train_fraction: float = 0.75
    train: TrainConfig = field(default_factory=TrainConfig)
    resolution: int = 40
    expand_factor: float = 3.0

    def __post_init__(self):
        if self.data.p != 2:
            raise ValueError(f"surface studies need p=2 data, got p={self.data.p}")
        if not self.seeds:
            raise ValueError("at least one seed is required")


@dataclass(frozen=True)
class SurfaceStudy:
    config: SurfaceStudyConfig
    generating_poly: Polynomial
    ols_poly: Polynomial
    nn_polys: dict[int, Polynomial]
    runs: tuple[PipelineResult, ...]
    box: tuple[float, float, float, float]
    extended_box: tuple[float, float, float, float]
    grids: dict[str, np.ndarray]


def surface_study(cfg: SurfaceStudyConfig) -> SurfaceStudy:
    """Train one network per seed on the same dataset and grid every polynomial.

    The dataset and split are pinned by the data seed; the least-squares
    baseline is fitted on the train split in original units at the
    generating degree.  Grids cover the data bounding box and the box
    expanded about its center.
    """
    runs = []
    for s in cfg.seeds:
        runs.append(
            run_pipeline(
                ExperimentConfig(
                    data=cfg.data,
                    activation=cfg.activation,
                    scaling=cfg.scaling,
                    h1=cfg.h1,
                    q=cfg.q,
                    train_fraction=cfg.train_fraction,
                    seed=s,
                    data_seed=cfg.data.seed,
                    train=cfg.train,
                )
            )
        )
    first = runs[0]
    gen = first.generating_poly
    ols_poly, _ = ols_fit(first.X_train, first.y_train, cfg.data.degree)
    nn_polys = {
        r.config.seed: transcode.rescale_to_original(r.transcoded, r.scaling_spec) for r in runs
    }
    X_all = np.vstack([first.X_train, first.X_test])
    box = data_box(X_all)
    ext = expand_box(box, cfg.expand_factor)
    grids: dict[str, np.ndarray] = {}
    for name, pl in [("generating", gen), ("ols", ols_poly)] + [
        (f"nn_seed{s}", nn_polys[s]) for s in cfg.seeds
    ]:
        grids[f"{name}_data"] = surface_grid(pl, box, cfg.resolution)
        grids[f"{name}_extended"] = surface_grid(pl, ext, cfg.resolution)
    return SurfaceStudy(
        config=cfg,
        generating_poly=gen,
        ols_poly=ols_poly,
        nn_polys=nn_polys,
        runs=tuple(runs),
        box=box,
        extended_box=ext,
        grids=grids,
    )


# ---------------------------------------------------------------------------
# TOML configuration files
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimulateConfig:
    data: DataGenConfig
    grid: BatchGrid
    train: TrainConfig
    train_fraction: float = 0.75
    coverage_epsilon: float = 0.1


def _check_keys(table: dict, allowed, name: str) -> None:
    for key in table:
        if key not in allowed:
            raise ValueError(f"unknown key '{key}' in [{name}]")


def _parse_data(table: dict) -> DataGenConfig:
    _check_keys(
        table,
        {
            "n",
            "p",
            "degree",
            "mean_range",
            "feature_variance",
            "coeff_range",
            "noise_sd",
            "seed",
        },
        "data",
    )
    kwargs = {}
    for key in ("n", "p", "degree", "seed"):
        if key in table:
            kwargs[key] = int(table[key])
    for key in ("feature_variance", "noise_sd"):
        if key in table:
            kwargs[key] = float(table[key])
    if "mean_range" in table:
        kwargs["mean_lo"], kwargs["mean_hi"] = (float(v) for v in table["mean_range"])
    if "coeff_range" in table:
        kwargs["coeff_lo"], kwargs["coeff_hi"] = (float(v) for v in table["coeff_range"])
    return DataGenConfig(**kwargs)


def _parse_train(table: dict) -> TrainConfig:
    allowed = {
        "max_epochs",
        "grad_tol",
        "step_init",
        "eta_plus",
        "eta_minus",
        "step_min",
        "step_max",
        "init",
        "init_scale",
    }
    _check_keys(table, allowed, "train")
    kwargs = {k: table[k] for k in table}
    if "max_epochs" in kwargs:
        kwargs["max_epochs"] = int(kwargs["max_epochs"])
    return TrainConfig(**kwargs)


def _load_toml(path) -> dict:
    with open(path, "rb") as fh:
        try:
            return tomllib.load(fh)
        except tomllib.TOMLDecodeError as e:
            raise ValueError(f"{path}: invalid TOML: {e}") from e


def load_simulate_config(path) -> SimulateConfig:
    doc = _load_toml(path)
    _check_keys(doc, {"data", "grid", "train", "experiment"}, "top level")
    data = _parse_data(doc.get("data", {}))
    grid_tbl = doc.get("grid", {})
    _check_keys(grid_tbl, {"activations", "scalings", "h1", "q"}, "grid")
    grid = BatchGrid(
        activations=tuple(grid_tbl.get("activations", BatchGrid.activations)),
        scalings=tuple(grid_tbl.get("scalings", BatchGrid.scalings)),
        h1_values=tuple(int(v) for v in grid_tbl.get("h1", BatchGrid.h1_values)),
        q_values=tuple(int(v) for v in grid_tbl.get("q", BatchGrid.q_values)),
    )
    train = _parse_train(doc.get("train", {}))
    exp_tbl = doc.get("experiment", {})
    _check_keys(exp_tbl, {"train_fraction", "coverage_epsilon"}, "experiment")
    return SimulateConfig(
        data=data,
        grid=grid,
        train=train,
        train_fraction=float(exp_tbl.get("train_fraction", 0.75)),
        coverage_epsilon=float(exp_tbl.get("coverage_epsilon", 0.1)),
    )


def load_surface_config(path) -> SurfaceStudyConfig:
    doc = _load_toml(path)
    _check_keys(doc, {"data", "surfaces", "train"}, "top level")
    data = _parse_data(doc.get("data", {}))
    tbl = doc.get("surfaces", {})
    _check_keys(
        tbl,
        {
            "activation",
            "scaling",
            "h1",
            "q",
            "seeds",
            "train_fraction",
            "resolution",
            "expand_factor",
        },
        "surfaces",
    )
    return SurfaceStudyConfig(
        data=data,
        activation=tbl.get("activation", "softplus"),
        scaling=tbl.get("scaling", "symmetric"),
        h1=int(tbl.get("h1", 4)),
        q=int(tbl.get("q", 2)),
        seeds=tuple(int(s) for s in tbl.get("seeds", (1, 2, 3, 4))),
        train_fraction=float(tbl.get("train_fraction", 0.75)),
        train=_parse_train(doc.get("train", {})),
        resolution=int(tbl.get("resolution", 40)),
        expand_factor=float(tbl.get("expand_factor", 3.0)),
    )
