"""Kernel-embedding analysis of replicated spatial point patterns.

Pipeline: embed each point pattern as a kernel sum in a reproducing
kernel Hilbert space, re-express it on a fixed anchor grid via a ridge
solve, project onto the truncated eigenbasis of the anchor Gram matrix,
then run multivariate tests (Box's M, MANOVA, ANOVA) or discriminant
classification (LDA/QDA with leave-one-out CV) on the resulting feature
vectors.
"""

from .classify import (
    DiscriminantModel,
    Prediction,
    fit,
    loocv,
    predict,
    predict_many,
    training_error,
)
from .errors import (
    DataFormatError,
    NumericalError,
    RkhsppError,
    SingularSystemError,
    ValidationError,
)
from .kernelops import HAVE_COMPILED
from .kernels import (
    GridElement,
    GridSmoother,
    KernelConfig,
    RkhsElement,
    embed,
    evaluate,
    evaluate_many,
    export_field,
    gram_matrix,
    inner_product,
    kernel_eval,
    mean_element,
    norm,
    select_gamma,
    smooth_to_grid,
)
from .mvstats import (
    GroupedFeatures,
    TestResult,
    anova_univariate,
    boxm_test,
    manova_pillai,
    manova_wilks,
)
from .pipeline import (
    DEFAULT_CONFIG,
    EXPERIMENT_CONFIG,
    EXPERIMENTS,
    SCENARIOS,
    PipelineConfig,
    extract_features,
    run_experiment,
    simulate_scenario,
)
from .pointpat import (
    UNIT_WINDOW,
    Grid,
    LabeledPatternSet,
    PointPattern,
    Window,
    load_patterns,
    make_grid,
    save_patterns,
    simulate_hppp,
    simulate_pcpp,
)
from .spectral import (
    FeatureVector,
    SpectralBasis,
    feature_inner,
    features_from_csv,
    features_to_csv,
    project,
    reconstruct,
    spectral_basis,
)

__version__ = "0.1.0"
