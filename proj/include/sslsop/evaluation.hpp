#pragma once

#include <cstdint>
#include <vector>

#include "sslsop/trainer.hpp"

namespace sslsop {

// Seeded random partition of [0, n) into folds of near-equal size.
struct CvPlan {
    std::vector<int> fold_of;   // per-index fold id
    int folds = 0;
    std::uint64_t seed = 0;

    std::vector<int> fold_indices(int fold) const;
    std::vector<int> complement_indices(int fold) const;
};

CvPlan make_cv_plan(int n, int folds, std::uint64_t seed);

// Seeded uniform sample of ceil(fraction * |train|) indices to keep labeled.
// Returned ascending; always at least one index.
std::vector<int> mask_labels(const std::vector<int>& train_indices, double fraction,
                             std::uint64_t seed);

double average_loss(const std::vector<StructuredOutput>& truths,
                    const std::vector<StructuredOutput>& preds, LossKind kind,
                    const OutputDescriptor& desc);

struct Protocol {
    int folds = 10;
    double labeled_fraction = 0.3;
    std::uint64_t seed = 0;
};

struct ExperimentReport {
    std::vector<double> per_fold_loss;
    std::vector<double> per_fold_train_seconds;
    double mean_loss = 0.0;
    TrainConfig config;
    Protocol protocol;
};

// Cross-validated protocol: per fold, train on the other folds with the
// labeled fraction masked in (fold seeds derived as seed + fold_id),
// predict the held-out fold, record the average structured loss and the
// wall-clock training seconds. Requires a fully labeled dataset.
ExperimentReport run_experiment(const DatasetSplit& data, const TrainConfig& cfg,
                                const Protocol& protocol);

// Same protocol with k forced to the fold's training-set size: every
// neighborhood covers the whole training set, so all local predictors
// coincide and the run degenerates to one global linear predictor.
ExperimentReport run_global_baseline(const DatasetSplit& data, const TrainConfig& cfg,
                                     const Protocol& protocol);

enum class SweepParam { K, C };

struct SweepRow {
    double param_value;
    double mean_loss;
    double std_loss;   // sample std over fold losses, 0 when folds < 2
};

// One run_experiment per value; rows emitted in ascending value order.
std::vector<SweepRow> sweep(const DatasetSplit& data, const TrainConfig& cfg,
                            const Protocol& protocol, SweepParam param,
                            std::vector<double> values);

// Seeded synthetic datasets standing in for real corpora.
//   Multiclass: `modes` Gaussian clusters per class on a ring; with two
//     classes and two modes opposite ring positions share a class, so no
//     single linear predictor separates them but local ones do.
//   TreeLeaf: fixed 2-level tree (root, 3 internal nodes, 2 leaves each),
//     one Gaussian cluster per leaf.
//   TagSequence: T=3, L=4; Markov tag chains with tag-conditioned Gaussian
//     segment features (d divisible by L and d/L >= T).
struct SynthSpec {
    OutputFamily family = OutputFamily::Multiclass;
    int n = 100;
    int d = 2;
    int classes = 2;    // Multiclass only
    int modes = 1;      // Multiclass only
    double noise = 0.1;
    std::uint64_t seed = 0;
};

DatasetSplit generate_synthetic(const SynthSpec& spec);

}  // namespace sslsop
