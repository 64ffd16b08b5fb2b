#include "sslsop/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sslsop/inference.hpp"
#include "sslsop/rng.hpp"

namespace sslsop {

std::vector<int> CvPlan::fold_indices(int fold) const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(fold_of.size()); ++i)
        if (fold_of[i] == fold) out.push_back(i);
    return out;
}

std::vector<int> CvPlan::complement_indices(int fold) const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(fold_of.size()); ++i)
        if (fold_of[i] != fold) out.push_back(i);
    return out;
}

CvPlan make_cv_plan(int n, int folds, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("empty dataset");
    if (folds < 1 || folds > n)
        throw std::invalid_argument("folds = " + std::to_string(folds) + " out of range [1, " +
                                    std::to_string(n) + "]");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);

    CvPlan plan;
    plan.folds = folds;
    plan.seed = seed;
    plan.fold_of.assign(n, 0);
    for (int pos = 0; pos < n; ++pos) plan.fold_of[order[pos]] = pos % folds;
    return plan;
}

std::vector<int> mask_labels(const std::vector<int>& train_indices, double fraction,
                             std::uint64_t seed) {
    if (train_indices.empty()) throw std::invalid_argument("empty training set");
    if (!(fraction > 0.0) || fraction > 1.0)
        throw std::invalid_argument("labeled fraction must be in (0, 1]");
    const auto count = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(train_indices.size())));

    std::vector<int> order = train_indices;
    Rng rng(seed);
    rng.shuffle(order);
    order.resize(std::max<std::size_t>(1, count));
    std::sort(order.begin(), order.end());
    return order;
}

double average_loss(const std::vector<StructuredOutput>& truths,
                    const std::vector<StructuredOutput>& preds, LossKind kind,
                    const OutputDescriptor& desc) {
    if (truths.empty()) throw std::invalid_argument("empty evaluation set");
    if (truths.size() != preds.size())
        throw std::invalid_argument("truth/prediction length mismatch: " +
                                    std::to_string(truths.size()) + " vs " +
                                    std::to_string(preds.size()));
    double total = 0.0;
    for (std::size_t i = 0; i < truths.size(); ++i)
        total += loss(kind, desc, truths[i], preds[i]);
    return total / static_cast<double>(truths.size());
}

namespace {

void require_fully_labeled(const DatasetSplit& data) {
    if (static_cast<int>(data.labeled.size()) != data.n())
        throw std::invalid_argument("cross-validation needs a fully labeled dataset (" +
                                    std::to_string(data.labeled.size()) + " of " +
                                    std::to_string(data.n()) + " labeled)");
}

ExperimentReport run_protocol(const DatasetSplit& data, const TrainConfig& cfg,
                              const Protocol& protocol, bool global_k) {
    cfg.validate();
    data.validate();
    require_fully_labeled(data);
    if (protocol.folds < 2)
        throw std::invalid_argument("protocol needs at least 2 folds");

    const CvPlan plan = make_cv_plan(data.n(), protocol.folds, protocol.seed);

    ExperimentReport report;
    report.config = cfg;
    report.protocol = protocol;

    for (int fold = 0; fold < protocol.folds; ++fold) {
        const auto train_global = plan.complement_indices(fold);
        const auto test_global = plan.fold_indices(fold);
        const auto labeled_global =
            mask_labels(train_global, protocol.labeled_fraction,
                        protocol.seed + static_cast<std::uint64_t>(fold));

        DatasetSplit fold_data{{}, {}, data.desc, data.kind};
        fold_data.X.reserve(train_global.size());
        std::vector<int> local_of(data.n(), -1);
        for (int g : train_global) {
            local_of[g] = static_cast<int>(fold_data.X.size());
            fold_data.X.push_back(data.X[g]);
        }
        for (int g : labeled_global) fold_data.labeled.emplace(local_of[g], data.labeled.at(g));

        TrainConfig fold_cfg = cfg;
        if (global_k) fold_cfg.k = static_cast<int>(train_global.size());
        if (fold_cfg.k > static_cast<int>(train_global.size()))
            throw std::invalid_argument("fold " + std::to_string(fold) + ": k = " +
                                        std::to_string(fold_cfg.k) + " exceeds training size " +
                                        std::to_string(train_global.size()));

        const auto t0 = std::chrono::steady_clock::now();
        auto [model, state] = train(fold_data, fold_cfg);
        const auto t1 = std::chrono::steady_clock::now();

        std::vector<FeatureVector> queries;
        std::vector<StructuredOutput> truths;
        queries.reserve(test_global.size());
        for (int g : test_global) {
            queries.push_back(data.X[g]);
            truths.push_back(data.labeled.at(g));
        }
        const auto preds = predict_batch(model, fold_data.X, queries, cfg.threads);

        report.per_fold_loss.push_back(average_loss(truths, preds, data.kind, data.desc));
        report.per_fold_train_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    }

    report.mean_loss = std::accumulate(report.per_fold_loss.begin(), report.per_fold_loss.end(), 0.0) /
                       static_cast<double>(report.per_fold_loss.size());
    return report;
}

}  // namespace

ExperimentReport run_experiment(const DatasetSplit& data, const TrainConfig& cfg,
                                const Protocol& protocol) {
    return run_protocol(data, cfg, protocol, false);
}

ExperimentReport run_global_baseline(const DatasetSplit& data, const TrainConfig& cfg,
                                     const Protocol& protocol) {
    return run_protocol(data, cfg, protocol, true);
}

std::vector<SweepRow> sweep(const DatasetSplit& data, const TrainConfig& cfg,
                            const Protocol& protocol, SweepParam param,
                            std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
    std::sort(values.begin(), values.end());

    // Smallest fold training size bounds admissible k.
    const int min_train = data.n() - (data.n() + protocol.folds - 1) / protocol.folds;
    for (double v : values) {
        if (param == SweepParam::K) {
            if (v < 1.0 || v != std::floor(v) || v > static_cast<double>(min_train))
                throw std::invalid_argument("invalid k sweep value " + std::to_string(v) +
                                            " (need integer in [1, " + std::to_string(min_train) +
                                            "])");
        } else if (v < 0.0) {
            throw std::invalid_argument("invalid C sweep value " + std::to_string(v));
        }
    }

    std::vector<SweepRow> rows;
    rows.reserve(values.size());
    for (double v : values) {
        TrainConfig run_cfg = cfg;
        if (param == SweepParam::K)
            run_cfg.k = static_cast<int>(v);
        else
            run_cfg.C = v;
        const auto report = run_experiment(data, run_cfg, protocol);

        double var = 0.0;
        for (double l : report.per_fold_loss) {
            const double dev = l - report.mean_loss;
            var += dev * dev;
        }
        const auto folds = report.per_fold_loss.size();
        const double std_loss = folds > 1 ? std::sqrt(var / static_cast<double>(folds - 1)) : 0.0;
        rows.push_back({v, report.mean_loss, std_loss});
    }
    return rows;
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Cluster centers sit on a ring of this radius. The scale keeps squared
// feature norms above the tradeoff weights typically swept (C up to ~10), so
// the damped weight updates can still build margins past the loss scale.
constexpr double kRingRadius = 4.0;

FeatureVector cluster_center(int position, int total, int d) {
    FeatureVector center(d, 0.0);
    const double angle = kTwoPi * static_cast<double>(position) / static_cast<double>(total);
    center[0] = kRingRadius * std::cos(angle);
    if (d > 1) center[1] = kRingRadius * std::sin(angle);
    return center;
}

DatasetSplit synth_multiclass(const SynthSpec& spec) {
    if (spec.classes < 2) throw std::invalid_argument("multiclass generator needs >= 2 classes");
    if (spec.modes < 1) throw std::invalid_argument("modes must be >= 1");
    const int clusters = spec.classes * spec.modes;

    DatasetSplit data{{}, {}, OutputDescriptor::multiclass(spec.classes), LossKind::ZeroOne};
    Rng rng(spec.seed);
    for (int i = 0; i < spec.n; ++i) {
        const int cluster = i % clusters;
        FeatureVector x = cluster_center(cluster, clusters, spec.d);
        for (double& v : x) v += spec.noise * rng.gaussian();
        data.X.push_back(std::move(x));
        data.labeled.emplace(i, StructuredOutput::multiclass(cluster % spec.classes));
    }
    return data;
}

DatasetSplit synth_tree(const SynthSpec& spec) {
    // root 0; internal 1..3 under the root; leaves 4..9, two per internal.
    const std::vector<int> parent{-1, 0, 0, 0, 1, 1, 2, 2, 3, 3};
    const std::vector<int> leaves{4, 5, 6, 7, 8, 9};
    DatasetSplit data{{}, {}, OutputDescriptor::tree_leaf(parent, leaves),
                      LossKind::TreeAncestorHeight};
    Rng rng(spec.seed);
    const int clusters = static_cast<int>(leaves.size());
    for (int i = 0; i < spec.n; ++i) {
        const int cluster = i % clusters;
        FeatureVector x = cluster_center(cluster, clusters, spec.d);
        for (double& v : x) v += spec.noise * rng.gaussian();
        data.X.push_back(std::move(x));
        data.labeled.emplace(i, StructuredOutput::leaf(leaves[cluster]));
    }
    return data;
}

DatasetSplit synth_sequence(const SynthSpec& spec) {
    constexpr int T = 3;
    constexpr int L = 4;
    constexpr double kStayProbability = 0.6;
    if (spec.d % L != 0)
        throw std::invalid_argument("sequence generator needs d divisible by L = " +
                                    std::to_string(L));
    const int seg = spec.d / L;
    if (seg < T)
        throw std::invalid_argument("sequence generator needs d/L >= T = " + std::to_string(T));

    DatasetSplit data{{}, {}, OutputDescriptor::tag_sequence(T, L), LossKind::ZeroOne};
    Rng rng(spec.seed);
    for (int i = 0; i < spec.n; ++i) {
        std::vector<int> tags(L);
        tags[0] = static_cast<int>(rng.below(T));
        for (int p = 1; p < L; ++p) {
            if (rng.uniform01() < kStayProbability) {
                tags[p] = tags[p - 1];
            } else {
                const int offset = 1 + static_cast<int>(rng.below(T - 1));
                tags[p] = (tags[p - 1] + offset) % T;
            }
        }
        FeatureVector x(spec.d, 0.0);
        for (int p = 0; p < L; ++p)
            for (int f = 0; f < seg; ++f)
                x[p * seg + f] = (f % T == tags[p] ? 1.0 : 0.0) + spec.noise * rng.gaussian();
        data.X.push_back(std::move(x));
        data.labeled.emplace(i, StructuredOutput::tags(std::move(tags)));
    }
    return data;
}

}  // namespace

DatasetSplit generate_synthetic(const SynthSpec& spec) {
    if (spec.n < 1) throw std::invalid_argument("n must be >= 1");
    if (spec.d < 1) throw std::invalid_argument("d must be >= 1");
    if (spec.noise < 0.0) throw std::invalid_argument("noise must be nonnegative");
    switch (spec.family) {
        case OutputFamily::Multiclass: return synth_multiclass(spec);
        case OutputFamily::TreeLeaf: return synth_tree(spec);
        case OutputFamily::TagSequence: return synth_sequence(spec);
    }
    throw std::invalid_argument("unknown synthetic family");
}

}  // namespace sslsop
