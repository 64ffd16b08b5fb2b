#pragma once

#include <vector>

#include "sslsop/structured.hpp"

namespace sslsop {

// k-nearest-neighbor structure over the training inputs, plus the inverted
// membership lists needed by the output-update step.
//
// members[i] always starts with i itself (distance 0); the remaining k-1
// entries are sorted by (Euclidean distance to x_i, index).
// inverted[j] lists, ascending, every i with j in members[i].
struct NeighborhoodIndex {
    std::vector<std::vector<int>> members;
    std::vector<std::vector<int>> inverted;
    int k = 0;
    int n = 0;
};

NeighborhoodIndex build_index(const std::vector<FeatureVector>& X, int k);

// The k training indices nearest to a query point that is not itself part
// of the training set, ascending (distance, index).
std::vector<int> neighbors_of_query(const std::vector<FeatureVector>& X, const FeatureVector& q,
                                    int k);

double squared_distance(const FeatureVector& a, const FeatureVector& b);

}  // namespace sslsop
