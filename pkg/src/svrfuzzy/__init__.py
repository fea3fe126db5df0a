"""svrfuzzy: interpretable fuzzy rule extraction from epsilon-SVR models."""

from .benchmark import (
    ExperimentReport,
    ExperimentResult,
    MackeyGlassConfig,
    SupervisedSeries,
    generate_mackey_glass,
    make_supervised,
    paper_configs,
    rmse,
    run_experiment,
)
from .data import Dataset, DatasetFormatError, load_dataset, save_dataset
from .extraction import (
    DegenerateModelError,
    ExtractionConfig,
    ExtractionReport,
    InterpretableModel,
    IterationRecord,
    interpretability_test,
    max_pairwise_similarity,
    model_extraction,
    training_error,
)
from .fuzzy import (
    CoverageError,
    FuzzyRule,
    FuzzyRuleBase,
    GaussianMF,
    InferenceMode,
    firing_strength,
    format_rules,
    from_svr,
    infer,
    infer_batch,
    make_rulebase,
    mf_eval,
)
from .refine import RefineConfig, RefineResult, gradient_step, refine
from .serialize import (
    ModelFormatError,
    load_model_file,
    save_interpretable_model,
    save_rulebase,
    save_svr_model,
)
from .similarity import SimilarityConfig, merge, similarity_gaussian, similarity_integral
from .svr import (
    ConvergenceWarning,
    KernelConfig,
    KernelKind,
    SvrModel,
    SvrTrainConfig,
    dual_objective,
    fit_normalized_model,
    gaussian_kernel,
    gram_matrix,
    modified_hessian,
    normalized_gram,
    normalized_kernel,
    predict,
    predict_batch,
    train_svr,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
