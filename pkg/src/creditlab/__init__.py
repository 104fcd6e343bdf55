"""Credit risk model laboratory.

Two competing classifiers over firm financial ratios: a stepwise two-group
linear discriminant function and a perceptron trained by resilient
backpropagation, with a harness that runs both on a year-based split and
compares their classification rates.

Modules
-------
datamodel     statements, ratios R01..R15, datasets, CSV I/O, year split
discriminant  group mean tests, stepwise selection, LDA fit/score/classify
neural        perceptron, backprop, Rprop, median threshold, search
harness       synthetic data, pipeline config, end-to-end comparison
reference     published result tables kept as replay fixtures
"""
from .datamodel import (
    Dataset,
    FinancialStatement,
    FirmRecord,
    RatioVector,
    compute_ratios,
    load_dataset,
    split_by_period,
    write_dataset,
)
from .discriminant import (
    ConfusionTable,
    GroupMeanTest,
    LdaModel,
    StepwiseTrace,
    classification_table,
    classify,
    fit_lda,
    group_mean_test,
    score,
    stepwise_select,
)
from .harness import (
    ComparisonReport,
    PipelineConfig,
    SyntheticSpec,
    generate_synthetic,
    run_pipeline,
)
from .neural import (
    EvalResult,
    Network,
    TrainConfig,
    TrainHistory,
    architecture_search,
    forward,
    gradient,
    init_network,
    median_threshold_classify,
    mse,
    train_rprop,
)

from . import reference

__version__ = "0.1.0"
