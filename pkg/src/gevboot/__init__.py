"""Binary regression with an extreme-value response curve.

Maximum-likelihood fitting with the shape parameter fixed or profiled,
Wald inference, parametric-bootstrap confidence intervals and hypothesis
tests, a seed-deterministic simulator, and a CSV/CLI front end.
"""

from ._backend import active_backend
from .bootstrap import (
    BootstrapResult,
    ReplicateMatrix,
    bootstrap_mean_se,
    bootstrap_test,
    parametric_resample,
    percentile_ci,
    run_bootstrap,
)
from .data import ColumnSpec, Dataset, read_csv, write_csv
from .fit import (
    FitResult,
    InferenceRow,
    InferenceTable,
    fit_mle,
    log_likelihood,
    score,
    wald_inference,
)
from .links import (
    TAU_MAX,
    TAU_SWITCH,
    ShapeTau,
    TauMode,
    d_prob_d_eta,
    link,
    log_survival,
    response_prob,
)
from .simulate import CovariateSpec, SimSpec, dengue_analog, simulate_dataset

__version__ = "0.1.0"

__all__ = [
    "BootstrapResult",
    "ColumnSpec",
    "CovariateSpec",
    "Dataset",
    "FitResult",
    "InferenceRow",
    "InferenceTable",
    "ReplicateMatrix",
    "ShapeTau",
    "SimSpec",
    "TAU_MAX",
    "TAU_SWITCH",
    "TauMode",
    "active_backend",
    "bootstrap_mean_se",
    "bootstrap_test",
    "d_prob_d_eta",
    "dengue_analog",
    "fit_mle",
    "link",
    "log_likelihood",
    "log_survival",
    "parametric_resample",
    "percentile_ci",
    "read_csv",
    "response_prob",
    "run_bootstrap",
    "score",
    "simulate_dataset",
    "wald_inference",
    "write_csv",
    "__version__",
]
