"""Fisher-Rao geometry of densities and prior-sensitivity analysis tools."""

from .errors import *  # noqa: F401,F403
from .grid import (  # noqa: F401
    DEFAULT_N_POINTS,
    Grid,
    GridPdf,
    Srd,
    TangentVector,
    default_grid,
    from_srd,
    normalize_pdf,
    tangent_project,
    to_srd,
)
from .geometry import (  # noqa: F401
    KarcherInfo,
    TpcaResult,
    exp_map,
    fr_distance,
    geodesic_path,
    inv_exp_map,
    karcher_mean,
    karcher_variance,
    tangent_pca,
)
from .measures import (  # noqa: F401
    DEFAULT_N_COMPONENTS,
    CumulativeSpectrum,
    MeasureTriple,
    SampleSummary,
    cumulative_spectrum,
    e_upper_bound,
    measure_d,
    measure_e,
    measure_triple,
    measure_v,
    replicate_band,
    summarize_sample,
    triple_from_summaries,
)
from .samplers import (  # noqa: F401
    BetaBase,
    CcvConfig,
    Dataset,
    DcvConfig,
    DpConfig,
    DpgmmConfig,
    McmcControl,
    PosteriorSample,
    UniformBase,
    ccv_posterior,
    centering_weight,
    crp_expected_clusters,
    dcv_posterior,
    derived_seed,
    dp_posterior,
    dpgmm_posterior,
    sample_crp_partition,
    smoothed_centering_measure,
)
from .sweep import (  # noqa: F401
    BandTriple,
    MODEL_TAGS,
    SweepResult,
    SweepSpec,
    get_config_value,
    model_sampler,
    run_sweep,
    set_config_value,
    sweep_grid_presets,
)
from .config import (  # noqa: F401
    ExperimentConfig,
    GeometryOptions,
    OutputOptions,
    apply_preset,
    dump_config,
    load_config,
)
from .io import (  # noqa: F401
    load_dataset,
    read_density_matrix,
    write_density_matrix,
)

__version__ = "0.1.0"
