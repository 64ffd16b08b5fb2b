"""Semi-supervised learning of local structured output predictors.

One linear predictor per k-nearest-neighborhood, trained jointly with the
missing outputs of unlabeled points; test points are predicted by averaging
the scores of their neighbors' local predictors.
"""

from ._sslsop import (
    ExperimentReport,
    InitPolicy,
    IterationRecord,
    LossKind,
    ModelParams,
    NeighborhoodIndex,
    OutputDescriptor,
    OutputFamily,
    Protocol,
    ScoredCandidate,
    SpaceTooLargeError,
    StructuredOutput,
    SweepParam,
    SweepRow,
    SynthSpec,
    TrainConfig,
    TrainingDivergedError,
    TrainState,
    DatasetSplit,
    __version__,
    argmax_output,
    average_loss,
    build_index,
    encode_output,
    enumerate_outputs,
    generate_synthetic,
    joint_feature,
    load_dataset,
    load_model,
    loss,
    loss_aug_argmax,
    make_cv_plan,
    mask_labels,
    neighbors_of_query,
    predict,
    predict_batch,
    run_experiment,
    run_global_baseline,
    save_dataset,
    save_model,
    score,
    scored_candidates,
    sweep,
    train,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
