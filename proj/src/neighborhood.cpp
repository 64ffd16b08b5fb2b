#include "sslsop/neighborhood.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace sslsop {

double squared_distance(const FeatureVector& a, const FeatureVector& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("distance: dimension mismatch " + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()));
    double s = 0.0;
    for (std::size_t f = 0; f < a.size(); ++f) {
        const double diff = a[f] - b[f];
        s += diff * diff;
    }
    return s;
}

namespace {

void check_inputs(const std::vector<FeatureVector>& X, int k) {
    if (X.empty()) throw std::invalid_argument("empty dataset");
    if (k < 1 || static_cast<std::size_t>(k) > X.size())
        throw std::invalid_argument("k = " + std::to_string(k) + " out of range [1, " +
                                    std::to_string(X.size()) + "]");
    for (const auto& x : X)
        if (x.size() != X[0].size())
            throw std::invalid_argument("dataset feature vectors have mixed dimensions");
}

}  // namespace

NeighborhoodIndex build_index(const std::vector<FeatureVector>& X, int k) {
    check_inputs(X, k);
    const int n = static_cast<int>(X.size());

    NeighborhoodIndex index;
    index.k = k;
    index.n = n;
    index.members.resize(n);
    index.inverted.resize(n);

    std::vector<std::pair<double, int>> row;
    for (int i = 0; i < n; ++i) {
        row.clear();
        row.reserve(n - 1);
        for (int j = 0; j < n; ++j)
            if (j != i) row.emplace_back(squared_distance(X[i], X[j]), j);
        std::sort(row.begin(), row.end());

        // Self is always rank 1 (distance 0), even when exact duplicates
        // with smaller indices exist.
        auto& members = index.members[i];
        members.reserve(k);
        members.push_back(i);
        for (int r = 0; r < k - 1; ++r) members.push_back(row[r].second);
    }

    for (int i = 0; i < n; ++i)
        for (int j : index.members[i]) index.inverted[j].push_back(i);
    for (auto& inv : index.inverted) std::sort(inv.begin(), inv.end());
    return index;
}

std::vector<int> neighbors_of_query(const std::vector<FeatureVector>& X, const FeatureVector& q,
                                    int k) {
    check_inputs(X, k);
    std::vector<std::pair<double, int>> row;
    row.reserve(X.size());
    for (int j = 0; j < static_cast<int>(X.size()); ++j)
        row.emplace_back(squared_distance(X[j], q), j);
    std::sort(row.begin(), row.end());

    std::vector<int> out;
    out.reserve(k);
    for (int r = 0; r < k; ++r) out.push_back(row[r].second);
    return out;
}

}  // namespace sslsop
