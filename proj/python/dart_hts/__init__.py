"""Covariate-informed Bayesian factor model for dose-response screens.

The heavy lifting lives in the compiled ``_core`` extension; this package
re-exports its public surface and adds a couple of small conveniences.
"""

import numpy as _np

from ._core import (  # noqa: F401
    AlignedDraws,
    BinTable,
    ChainStats,
    CovariateSet,
    CoverageBin,
    CoverageResult,
    DartFit,
    DartModel,
    DoseGrid,
    DrawsFile,
    FitOptions,
    Hyperparameters,
    KernelCholesky,
    MeanEffect,
    MetricReport,
    ModelOptions,
    ObservationCell,
    ObservationSet,
    ParamLayout,
    ParametricFit,
    PcaResult,
    PosteriorDraws,
    PsisLooResult,
    SamplerConfig,
    SimulationConfig,
    SyntheticDataset,
    WaicResult,
    __version__,
    crps,
    effect_at_cells,
    effect_correlation,
    ess_bulk,
    ess_tail,
    evaluate_fit,
    exp5_response,
    fit_curve,
    fit_dart,
    hill_response,
    kernel_matrix,
    load_dataset,
    match_align,
    pca_reduce,
    pfas_preset,
    pointwise_loglik_matrix,
    posterior_mean_effect,
    power_response,
    psis_loo,
    read_draws,
    replicate_means,
    rmse_r2,
    sample,
    simulate_dataset,
    simulation_dose_grid,
    split_rhat,
    standard_dose_grid,
    varimax_criterion,
    varimax_rotation,
    waic,
    write_dataset,
    write_draws,
)


def effect_array(effect):
    """Posterior surface as a (chems, genes, doses) numpy array."""
    out = _np.empty((effect.n_chems, effect.n_genes, effect.n_doses))
    for j, block in enumerate(effect.by_gene):
        out[:, j, :] = block
    return out
