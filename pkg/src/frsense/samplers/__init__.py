"""Posterior samplers producing grid-evaluated density draws."""

from .common import (
    Dataset,
    McmcControl,
    PosteriorSample,
    crp_expected_clusters,
    derived_seed,
    make_rng,
    sample_crp_partition,
    silverman_bandwidth,
)
from .dp import (
    BetaBase,
    DpConfig,
    UniformBase,
    centering_weight,
    dp_posterior,
    smoothed_centering_measure,
)
from .dpgmm import DpgmmConfig, dpgmm_posterior
from .griffin import (
    CcvConfig,
    DcvConfig,
    ccv_posterior,
    dcv_posterior,
    griffin_steel_pdf,
    sample_griffin_steel,
)

__all__ = [
    "BetaBase",
    "CcvConfig",
    "Dataset",
    "DcvConfig",
    "DpConfig",
    "DpgmmConfig",
    "McmcControl",
    "PosteriorSample",
    "UniformBase",
    "ccv_posterior",
    "centering_weight",
    "crp_expected_clusters",
    "dcv_posterior",
    "derived_seed",
    "dp_posterior",
    "dpgmm_posterior",
    "griffin_steel_pdf",
    "make_rng",
    "sample_crp_partition",
    "sample_griffin_steel",
    "silverman_bandwidth",
    "smoothed_centering_measure",
]
