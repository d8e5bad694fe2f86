"""Run loop generalized over optimizers, plus config, outputs, and experiments.

One run alternates a gated stochastic-gradient weight update with one step of
each Markov chain. While the hot-start gate is closed the weights stay frozen
at their initialization and only the chains advance; once the per-chain
log-potential traces stabilize, every iteration subsamples the data, forms
the gradient estimate, steps the optimizer, and then steps the chains.
"""

from __future__ import annotations

import csv
import json
import os
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .core import (
    Dataset,
    init_weights,
    load_csv,
    log_potential,
    select_coreset,
)
from .errors import NumericalError, ReferenceFailure
from .gradient import draw_subsample, subsampled_gradient
from .hotstart import HotStartConfig, hot_start_statistic
from .kernels import SliceConfig, make_kernel
from .metrics import DrawStream, avg_sq_z, gaussian_kl, reference_posterior
from .models import SsvsState, generate_synthetic, make_model
from .optimizers import HotDog, make_optimizer

MODEL_DATASET_KIND = {
    "gaussian_location": "location",
    "sparse_linreg": "regression",
    "linreg": "regression",
    "logreg": "classification",
    "poissonreg": "counts",
    "bradley_terry": "pairwise",
}

OUTPUT_DIR_ENV = "CORESETMCMC_OUTDIR"

CSV_COLUMNS = ("iter", "avg_sq_z", "grad_norm", "test_stat", "hot_started", "wall_ms")


@dataclass
class RunConfig:
    """Flat configuration for one run; every key can come from a config file."""

    model: str = "gaussian_location"
    dataset: str | None = None
    response_col: str | None = None
    n: int = 1000
    dim: int = 2
    data_seed: int = 0
    noise_sd: float = 25.0
    coreset_size: int = 20
    balance: bool = False
    chains: int = 2
    subsample: int | None = None
    optimizer: str = "hotdog"
    learning_rate: float = 1e-3
    r: float = 1e-3
    d0: float = 1e-6
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    iters: int = 1000
    seed: int = 0
    metric_stride: int = 100
    out: str | None = None
    init_offset: float = 0.0
    hot_start: bool | None = None
    threshold: float = 0.5
    min_iters: int = 9
    kernel: str | None = None
    slice_width: float = 1.0
    max_doublings: int = 30
    reference: str = "auto"
    reference_draws: int = 20_000
    track_kl: bool = False
    nu: float = 0.1
    lam: float = 1.0
    q: float = 0.1
    tau: float = 0.1
    slab: float = 10.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def validate(self):
        if self.model not in MODEL_DATASET_KIND:
            raise ValueError(f"unknown model {self.model!r}")
        if self.chains < 2:
            raise ValueError("need at least two chains")
        if self.iters < 1:
            raise ValueError("need at least one iteration")
        if self.coreset_size < 1:
            raise ValueError("coreset size must be positive")
        if self.metric_stride < 1:
            raise ValueError("metric stride must be positive")
        if self.track_kl and self.model != "gaussian_location":
            raise ValueError("KL tracking is only available for the Gaussian location model")


@dataclass
class RunRow:
    iter: int
    avg_sq_z: float
    grad_norm: float
    test_stat: float
    hot_started: bool
    wall_ms: float


@dataclass
class RunRecord:
    """Per-run results: the metric time series plus everything needed to replay."""

    config: RunConfig
    seed: int
    rows: list[RunRow] = field(default_factory=list)
    final_weights: np.ndarray | None = None
    coreset_indices: np.ndarray | None = None
    hot_start_iter: int | None = None
    final_metric: float = float("nan")
    status: str = "ok"
    error: str | None = None
    weights_frozen_pre_hotstart: bool = True
    kl_trace: list[tuple[int, float]] = field(default_factory=list)
    weight_trace: list[np.ndarray] | None = None
    n_kernel_steps: int = 0
    n_grad_evals: int = 0
    n_optim_iters: int = 0


def build_dataset(config: RunConfig) -> Dataset:
    """Materialize the run's dataset from CSV or the synthetic generator."""
    kind = MODEL_DATASET_KIND[config.model]
    if config.dataset is not None:
        return load_csv(config.dataset, kind, config.response_col)
    rng = np.random.default_rng(np.random.SeedSequence(config.data_seed))
    return generate_synthetic(config.model, config.n, config.dim, rng, noise_sd=config.noise_sd)


def build_model(config: RunConfig, dataset: Dataset):
    if config.model == "sparse_linreg":
        return make_model(config.model, dataset, nu=config.nu, lam=config.lam,
                          q=config.q, tau=config.tau, c=config.slab)
    return make_model(config.model, dataset)


def _optimizer_hyper(config: RunConfig) -> dict:
    return {
        "learning_rate": config.learning_rate,
        "r": config.r,
        "d0": config.d0,
        "beta1": config.beta1,
        "beta2": config.beta2,
        "eps": config.eps,
    }


def _offset_state(state, offset: float):
    if offset == 0.0:
        return state
    if isinstance(state, SsvsState):
        return SsvsState(state.beta + offset, state.gamma.copy(), state.sigma2)
    return np.asarray(state, dtype=float) + offset


def run_coreset_mcmc(config: RunConfig, dataset: Dataset | None = None,
                     record_weights: bool = False) -> RunRecord:
    """Execute one run; deterministic given the config and seed.

    Aborts caused by numerical failures return a partial record with a
    non-"ok" status instead of raising.
    """
    config.validate()
    if dataset is None:
        dataset = build_dataset(config)
    model = build_model(config, dataset)

    n = dataset.n
    m = config.coreset_size
    k = config.chains
    s = config.subsample if config.subsample is not None else m
    if not 1 <= s <= n:
        raise ValueError(f"subsample size {s} must lie in [1, {n}]")
    if m > n:
        raise ValueError(f"coreset size {m} exceeds dataset size {n}")

    seed_seq = np.random.SeedSequence(config.seed)
    sel_ss, init_ss, loop_ss, ref_ss, *chain_ss = seed_seq.spawn(4 + k)

    selection = select_coreset(dataset, m, balance=config.balance,
                               rng=np.random.default_rng(sel_ss))
    w0 = init_weights(n, m)
    w0_bytes = w0.tobytes()
    w = w0

    optimizer = make_optimizer(config.optimizer, w0, **_optimizer_hyper(config))
    gated = config.hot_start if config.hot_start is not None else config.optimizer == "hotdog"
    hot = not gated
    if isinstance(optimizer, HotDog):
        optimizer.h = hot
    hot_iter = None if gated else 0

    slice_config = SliceConfig(config.slice_width, config.max_doublings)
    kernel = make_kernel(config.kernel or model.default_kernel, model, dataset,
                         selection, slice_config)

    rng_init = np.random.default_rng(init_ss)
    states = [_offset_state(model.sample_prior(rng_init), config.init_offset)
              for _ in range(k)]
    chain_rngs = [np.random.default_rng(ss) for ss in chain_ss]
    rng_loop = np.random.default_rng(loop_ss)

    reference = None
    if config.reference == "auto":
        reference = reference_posterior(model, dataset, draws=config.reference_draws,
                                        rng=np.random.default_rng(ref_ss),
                                        slice_config=slice_config)
    elif config.reference != "none":
        raise ValueError("reference must be 'auto' or 'none'")

    hot_config = HotStartConfig(config.threshold, config.min_iters)
    potentials = [[] for _ in range(k)] if gated else None
    stream = DrawStream(model.draw_dim)
    record = RunRecord(config=config, seed=config.seed,
                       coreset_indices=selection.indices.copy(),
                       weight_trace=[] if record_weights else None)

    start = time.perf_counter()
    try:
        for t in range(1, config.iters + 1):
            if hot:
                sub = draw_subsample(n, s, rng_loop)
                estimate = subsampled_gradient(model, dataset, selection, w, states, sub)
                record.n_grad_evals += (m + s) * k
                record.n_optim_iters += 1
                w = optimizer.step(w, estimate.g)
                if np.isnan(w).any():
                    raise NumericalError("weights became NaN")
                grad_norm = float(np.linalg.norm(estimate.g))
            else:
                grad_norm = 0.0

            for j in range(k):
                states[j] = kernel.step(states[j], w, chain_rngs[j])
                stream.push(model.draw_vector(states[j]))
            record.n_kernel_steps += k

            test_stat = float("nan")
            if not hot:
                record.weights_frozen_pre_hotstart &= w.tobytes() == w0_bytes
                for j in range(k):
                    potentials[j].append(log_potential(w, states[j], model, dataset, selection))
                if t >= hot_config.min_iters:
                    test_stat = hot_start_statistic(potentials)
                    if test_stat < hot_config.threshold:
                        hot = True
                        hot_iter = t
                        if isinstance(optimizer, HotDog):
                            optimizer.h = True

            if record_weights:
                record.weight_trace.append(w.copy())
            if t % config.metric_stride == 0 or t == config.iters:
                metric = float("nan")
                if reference is not None and stream.count >= 2:
                    metric = avg_sq_z(stream.second_half_mean(), reference)
                record.rows.append(RunRow(t, metric, grad_norm, test_stat, hot,
                                          (time.perf_counter() - start) * 1000.0))
                if config.track_kl:
                    record.kl_trace.append((t, gaussian_kl(w, dataset, selection)))
    except (NumericalError, ReferenceFailure, np.linalg.LinAlgError) as exc:
        record.status = type(exc).__name__
        record.error = str(exc)

    record.final_weights = np.asarray(w, dtype=float).copy()
    record.hot_start_iter = hot_iter
    if record.rows:
        record.final_metric = record.rows[-1].avg_sq_z
    return record


def _param_tag(config: RunConfig) -> str:
    if config.optimizer == "adam":
        return f"_lr{config.learning_rate:g}"
    if config.optimizer in ("dog", "dowg", "hotdog"):
        return f"_r{config.r:g}"
    return f"_d0{config.d0:g}"


def default_output_dir(config: RunConfig) -> str:
    return config.out or os.environ.get(OUTPUT_DIR_ENV, "runs")


def emit_outputs(record: RunRecord, out_dir, name: str | None = None):
    """Write the run CSV and its JSON sidecar; returns both paths.

    Filenames carry the seed (and the optimizer's scale parameter) so
    repeated seeds and sweep points never clobber each other.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = record.config
    if name is None:
        name = f"{config.model}_{config.optimizer}{_param_tag(config)}"
    base = f"{name}_seed{record.seed}"
    csv_path = out_dir / f"{base}.csv"
    json_path = out_dir / f"{base}.json"

    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in record.rows:
            writer.writerow([row.iter, repr(row.avg_sq_z), repr(row.grad_norm),
                             repr(row.test_stat), int(row.hot_started), repr(row.wall_ms)])

    sidecar = {
        "config": config.to_dict(),
        "seed": record.seed,
        "hot_start_iter": record.hot_start_iter,
        "final_metric": record.final_metric,
        "status": record.status,
        "error": record.error,
        "coreset_indices": record.coreset_indices.tolist(),
        "final_weights": record.final_weights.tolist(),
        "weights_frozen_pre_hotstart": record.weights_frozen_pre_hotstart,
        "n_kernel_steps": record.n_kernel_steps,
        "n_grad_evals": record.n_grad_evals,
        "n_optim_iters": record.n_optim_iters,
        "kl_trace": [[t, v] for t, v in record.kl_trace],
    }
    with open(json_path, "w") as fh:
        json.dump(sidecar, fh, indent=2)
    return csv_path, json_path


@dataclass
class RateResult:
    """Empirical convergence-rate summary over seeds."""

    slopes: list[float]
    mean_slope: float
    final_kls: list[float]
    median_final_kl: float
    window: tuple[float, float]
    clamped: bool = False


KL_FLOOR = 1e-300


def rate_experiment(config: RunConfig, n_seeds: int = 10,
                    window: tuple[float, float] = (1e3, 1e4),
                    dataset: Dataset | None = None) -> RateResult:
    """Estimate the log-log decay slope of the coreset KL over a window.

    Runs ``n_seeds`` runs at consecutive seeds with KL tracking on, fits a
    least-squares line to log KL vs log t within the window for each run,
    and averages the slopes. The KL substitutes for the (non-unique) optimal
    weight distance as the convergence functional.
    """
    if config.model != "gaussian_location":
        raise ValueError("the rate experiment needs the Gaussian location model")
    if dataset is None:
        dataset = build_dataset(config)
    lo, hi = window
    slopes = []
    finals = []
    clamped = False
    for i in range(n_seeds):
        run_config = replace(config, seed=config.seed + i, track_kl=True)
        record = run_coreset_mcmc(run_config, dataset)
        if record.status != "ok":
            raise NumericalError(f"rate run seed {run_config.seed} aborted: {record.error}")
        t = np.array([p[0] for p in record.kl_trace], dtype=float)
        kl = np.array([p[1] for p in record.kl_trace], dtype=float)
        if (kl < KL_FLOOR).any():
            clamped = True
            kl = np.maximum(kl, KL_FLOOR)
        finals.append(float(kl[-1]))
        mask = (t >= lo) & (t <= hi)
        if mask.sum() < 2:
            raise ValueError("KL trace has fewer than two points inside the window")
        slope = np.polyfit(np.log(t[mask]), np.log(kl[mask]), 1)[0]
        slopes.append(float(slope))
    return RateResult(slopes=slopes, mean_slope=float(np.mean(slopes)),
                      final_kls=finals, median_final_kl=float(np.median(finals)),
                      window=(lo, hi), clamped=clamped)


SWEEP_GRID = (1e-3, 1e-2, 1e-1, 1e0, 1e1)

SWEEP_METHODS = ("adam", "dog", "dowg", "dadapt_sgd", "prodigy_adam", "hotdog")

BASELINE = ("hotdog", 1e-3)


def _param_field(kind: str) -> str:
    if kind == "adam":
        return "learning_rate"
    if kind in ("dog", "dowg", "hotdog"):
        return "r"
    return "d0"


def run_sweep(config: RunConfig, methods=SWEEP_METHODS, grid=SWEEP_GRID,
              n_seeds: int = 10, out_dir=None, dataset: Dataset | None = None) -> list[dict]:
    """Run every (method, scale parameter) cell over seeds and tabulate medians.

    The table mirrors the relative-error construction: each cell's median
    final metric is divided by the median of the recommended tuning-free
    baseline (hotdog at r = 1e-3) when that cell is part of the sweep.
    """
    if dataset is None:
        dataset = build_dataset(config)
    medians: dict[tuple[str, float], float] = {}
    for method in methods:
        for param in grid:
            finals = []
            for i in range(n_seeds):
                run_config = replace(config, optimizer=method, seed=config.seed + i,
                                     **{_param_field(method): param})
                record = run_coreset_mcmc(run_config, dataset)
                finals.append(record.final_metric)
                if out_dir is not None:
                    emit_outputs(record, Path(out_dir) / "runs")
            medians[(method, param)] = float(np.median(finals))
    baseline = medians.get(BASELINE, float("nan"))
    table = [
        {
            "optimizer": method,
            "param": param,
            "median_final_metric": med,
            "ratio_vs_baseline": med / baseline if baseline == baseline else float("nan"),
        }
        for (method, param), med in medians.items()
    ]
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "sweep_table.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(table[0].keys()))
            writer.writeheader()
            writer.writerows(table)
    return table
