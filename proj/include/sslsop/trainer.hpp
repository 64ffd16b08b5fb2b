#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "sslsop/neighborhood.hpp"
#include "sslsop/structured.hpp"

namespace sslsop {

enum class InitPolicy { NearestLabeled, FirstCandidate };

std::string to_string(InitPolicy policy);

struct TrainConfig {
    int k = 5;
    double C = 0.1;
    double eta = 0.05;
    int iterations = 50;
    std::uint64_t seed = 0;
    InitPolicy init_policy = InitPolicy::NearestLabeled;
    int threads = 1;   // per-neighborhood phases; 1 is the reference mode

    // eta*C < 1 keeps the (1 - eta*C) damping factor positive.
    void validate() const;
};

// Training data: inputs plus the labeled subset. Indices absent from
// `labeled` are the unlabeled points whose outputs get learned.
struct DatasetSplit {
    std::vector<FeatureVector> X;
    std::map<int, StructuredOutput> labeled;
    OutputDescriptor desc;
    LossKind kind;

    int n() const { return static_cast<int>(X.size()); }
    std::size_t dim() const { return X.empty() ? 0 : X[0].size(); }
    void validate() const;
};

// The complete set of local predictors: one weight vector per training point.
struct ModelParams {
    std::vector<std::vector<double>> w;
    OutputDescriptor desc;
    LossKind kind;
    int k = 0;

    int n() const { return static_cast<int>(w.size()); }
    std::size_t m() const { return w.empty() ? 0 : w[0].size(); }
};

struct IterationRecord {
    int iteration;          // 1-based
    double objective;
    int outputs_changed;
};

struct TrainState {
    std::vector<StructuredOutput> y;
    std::vector<bool> labeled_mask;
    // z[i][r] is the bound parameter for the r-th entry of members[i];
    // empty until the first bound update.
    std::vector<std::vector<StructuredOutput>> z;
    std::vector<double> objective_trace;
    std::vector<IterationRecord> log;
};

// Thrown when a weight vector turns non-finite mid-training (bad eta/C).
class TrainingDiverged : public std::runtime_error {
public:
    explicit TrainingDiverged(int iteration);
    int iteration;
};

// Zero weights; labeled outputs copied, unlabeled outputs filled per policy.
std::pair<ModelParams, TrainState> init_state(const DatasetSplit& data,
                                              const NeighborhoodIndex& index,
                                              const TrainConfig& cfg);

// Loss-augmented argmax for every (neighborhood, member) pair.
void update_bounds(const ModelParams& params, TrainState& state, const DatasetSplit& data,
                   const NeighborhoodIndex& index, int threads = 1);

// One subgradient step per neighborhood:
//   w_i <- (1 - eta*C) w_i + (eta/k) sum_j [phi(x_j, y_j) - phi(x_j, z_ij)].
void update_weights(ModelParams& params, const TrainState& state, const DatasetSplit& data,
                    const NeighborhoodIndex& index, const TrainConfig& cfg);

// Reassign outputs in ascending index order: labeled points keep their given
// output; each unlabeled point minimizes the summed bound terms of every
// neighborhood containing it. Returns the number of outputs that changed.
int update_outputs(const ModelParams& params, TrainState& state, const DatasetSplit& data,
                   const NeighborhoodIndex& index);

// Bound-surrogate objective with the state's current z:
//   sum_i { (1/k) sum_j [w_i.(phi(x_j,z_ij) - phi(x_j,y_j)) + loss(y_j,z_ij)]
//           + (C/2)||w_i||^2 }.
double objective(const ModelParams& params, const TrainState& state, const DatasetSplit& data,
                 const NeighborhoodIndex& index, double C);

// Full training loop: init, then `iterations` rounds of bound update,
// weight update, output update, recording the objective after each round.
std::pair<ModelParams, TrainState> train(const DatasetSplit& data, const TrainConfig& cfg);

}  // namespace sslsop
