"""Tree-structured compositions of linear support-vector regressors.

A feature graph groups the input features into small disjoint subsets, fits
a linear SVR per subset, and feeds the node predictions upward through
identical layers until a single root prediction remains. Initialised from a
tuned shallow SVM the tree reproduces it exactly; selective node retraining
with accept/revert then drives the training error monotonically down.
Companion tooling covers permutation search over feature groupings,
generalisation-bound checks, leave-one-out stability, and a benchmark CLI.
"""

from .dataset import (
    Dataset,
    SplitSpec,
    Standardizer,
    apply_standardizer,
    fit_standardizer,
    gen_synthetic,
    load_csv,
    load_libsvm,
    split,
    write_libsvm,
)
from .errors import (
    ConfigError,
    DataError,
    FeatureGraphError,
    NumericError,
    ParseError,
    SchemaError,
    VersionError,
)
from .graph import (
    FeatureGraph,
    GraphLayout,
    Node,
    build_layout,
    evaluate,
    evaluate_batch,
    flatten,
    init_from_svm,
    node_output_means,
)
from .svr import (
    DEFAULT_C_GRID,
    WIDE_C_GRID,
    LinearModel,
    SvrConfig,
    SvrTrainResult,
    auto_tol,
    qp_oracle_train,
    svr_predict,
    svr_train,
    tune_c,
)
from .training import (
    TrainConfig,
    TrainReport,
    UpdateRecord,
    eps_insensitive_loss,
    l2_norm,
    linreg_baseline,
    rmse,
    scaled_target,
    sse,
    svm_baseline,
    train_layer_based,
    train_loss_optimized,
)
from .permutation import (
    CorrelationStats,
    PairingWitness,
    PermSearchResult,
    adjacent_sig_stats,
    corr_pvalue,
    heuristic_permutation,
    pearson,
    random_perm_search,
    theorem3_witness,
)
from .analysis import (
    BoundInputs,
    BoundReport,
    ComplexityResult,
    LooResult,
    StabilityReport,
    bound_rhs_abs,
    bound_rhs_diff,
    complexity_probe,
    estimate_r_lambda,
    loo_stability,
    predicted_beta,
    stability_report,
    verify_bound,
)
from .persistence import (
    ModelDocument,
    document_from_graph,
    document_from_model,
    graph_from_document,
    load,
    model_from_document,
    save,
)

__version__ = "0.1.0"
