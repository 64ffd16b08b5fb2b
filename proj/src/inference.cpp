#include "sslsop/inference.hpp"

#include <optional>
#include <stdexcept>
#include <thread>

namespace sslsop {

std::vector<ScoredCandidate> scored_candidates(const ModelParams& model,
                                               const std::vector<FeatureVector>& X_train,
                                               const FeatureVector& x) {
    if (model.n() != static_cast<int>(X_train.size()))
        throw std::invalid_argument("model holds " + std::to_string(model.n()) +
                                    " predictors but " + std::to_string(X_train.size()) +
                                    " training points were given");
    const auto neighbors = neighbors_of_query(X_train, x, model.k);
    const auto candidates = enumerate_outputs(model.desc);
    const double inv_k = 1.0 / static_cast<double>(model.k);

    std::vector<ScoredCandidate> out;
    out.reserve(candidates.size());
    JointFeature phi;
    for (const auto& y : candidates) {
        joint_feature_into(model.desc, x, y, phi);
        double s = 0.0;
        for (int i : neighbors) s += score(model.w[i], phi);
        out.push_back({y, inv_k * s});
    }
    return out;
}

StructuredOutput predict(const ModelParams& model, const std::vector<FeatureVector>& X_train,
                         const FeatureVector& x) {
    const auto scored = scored_candidates(model, X_train, x);
    std::size_t best = 0;
    for (std::size_t c = 1; c < scored.size(); ++c)
        if (scored[c].s > scored[best].s) best = c;
    return scored[best].candidate;
}

std::vector<StructuredOutput> predict_batch(const ModelParams& model,
                                            const std::vector<FeatureVector>& X_train,
                                            const std::vector<FeatureVector>& queries,
                                            int threads) {
    std::vector<StructuredOutput> out(queries.size());
    std::vector<std::optional<std::string>> errors(queries.size());

    auto run = [&](std::size_t q) {
        try {
            out[q] = predict(model, X_train, queries[q]);
        } catch (const std::exception& e) {
            errors[q] = e.what();
        }
    };

    const int n = static_cast<int>(queries.size());
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (int q = 0; q < n; ++q) run(q);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (n + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int lo = t * chunk;
            const int hi = std::min(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([lo, hi, &run] {
                for (int q = lo; q < hi; ++q) run(q);
            });
        }
        for (auto& th : pool) th.join();
    }

    for (std::size_t q = 0; q < errors.size(); ++q)
        if (errors[q])
            throw std::runtime_error("query #" + std::to_string(q) + ": " + *errors[q]);
    return out;
}

}  // namespace sslsop
