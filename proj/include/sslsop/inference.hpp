#pragma once

#include <vector>

#include "sslsop/trainer.hpp"

namespace sslsop {

struct ScoredCandidate {
    StructuredOutput candidate;
    double s;   // (1/k) sum of the neighbors' matching scores
};

// Every candidate with its averaged matching score against x, in canonical
// enumeration order. The averaged scores of the k nearest neighbors' local
// predictors; exposed for inspection and debug dumps.
std::vector<ScoredCandidate> scored_candidates(const ModelParams& model,
                                               const std::vector<FeatureVector>& X_train,
                                               const FeatureVector& x);

// Structured output for a new point: the candidate with the highest score
// averaged over the local predictors of the k nearest training neighbors.
// Ties resolve to the first candidate in canonical order.
StructuredOutput predict(const ModelParams& model, const std::vector<FeatureVector>& X_train,
                         const FeatureVector& x);

// Elementwise predict, order-preserving. The first failing query aborts the
// batch with its position in the error message.
std::vector<StructuredOutput> predict_batch(const ModelParams& model,
                                            const std::vector<FeatureVector>& X_train,
                                            const std::vector<FeatureVector>& queries,
                                            int threads = 1);

}  // namespace sslsop
