"""Coreset MCMC: adaptive coreset weight learning with pluggable optimizers."""

from .core import (
    ChainEnsemble,
    CoresetSelection,
    Dataset,
    init_weights,
    load_csv,
    log_potential,
    loglik_table,
    select_coreset,
)
from .errors import NotReadyError, NumericalError, ReferenceFailure, UnsupportedModelError
from .gradient import (
    GradientEstimate,
    center_logliks,
    draw_subsample,
    estimate_gradient,
    exact_kl_gradient,
    subsampled_gradient,
)
from .harness import (
    RateResult,
    RunConfig,
    RunRecord,
    RunRow,
    build_dataset,
    build_model,
    emit_outputs,
    rate_experiment,
    run_coreset_mcmc,
    run_sweep,
)
from .hotstart import (
    HotStartConfig,
    hot_start_statistic,
    hot_start_test,
    segment_stats,
    trace_statistic,
)
from .kernels import (
    GaussianExactKernel,
    SliceConfig,
    SliceKernel,
    SsvsGibbsKernel,
    gaussian_exact_step,
    make_kernel,
    slice_step,
    ssvs_gibbs_step,
)
from .metrics import (
    DrawStream,
    ReferencePosterior,
    avg_sq_z,
    gaussian_kl,
    reference_posterior,
    second_half_mean,
)
from .models import (
    BradleyTerryModel,
    GaussianLocationModel,
    LinearRegressionModel,
    LogisticRegressionModel,
    PoissonRegressionModel,
    SparseRegressionModel,
    SsvsState,
    gaussian_posterior_params,
    generate_synthetic,
    make_model,
    sparse_true_coefficients,
)
from .optimizers import (
    Adam,
    DAdaptSgd,
    Dog,
    Dowg,
    HotDog,
    ProdigyAdam,
    make_optimizer,
    project_nonneg,
)

__version__ = "0.1.0"
