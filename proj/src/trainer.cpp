#include "sslsop/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace sslsop {

std::string to_string(InitPolicy policy) {
    return policy == InitPolicy::NearestLabeled ? "nearest_labeled" : "first_candidate";
}

void TrainConfig::validate() const {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (C < 0.0) throw std::invalid_argument("C must be nonnegative");
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
    if (!(eta * C < 1.0))
        throw std::invalid_argument("eta*C = " + std::to_string(eta * C) + " must be < 1");
    if (iterations < 0) throw std::invalid_argument("iteration count must be >= 0");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

void DatasetSplit::validate() const {
    if (X.empty()) throw std::invalid_argument("empty dataset");
    if (labeled.empty()) throw std::invalid_argument("no labeled points");
    const std::size_t d = X[0].size();
    for (const auto& x : X) {
        if (x.size() != d) throw std::invalid_argument("dataset feature vectors have mixed dimensions");
        for (double v : x)
            if (!std::isfinite(v)) throw std::invalid_argument("dataset contains non-finite features");
    }
    for (const auto& [i, y] : labeled) {
        if (i < 0 || i >= n())
            throw std::invalid_argument("labeled index " + std::to_string(i) + " out of range");
        desc.require_valid(y);
    }
}

TrainingDiverged::TrainingDiverged(int iteration_)
    : std::runtime_error("weights became non-finite at iteration " + std::to_string(iteration_) +
                         "; lower eta or C"),
      iteration(iteration_) {}

namespace {

// Plain blocked parallel map; fn(i) for i in [0, n). Each i writes only its
// own slot, so scheduling cannot change the arithmetic.
void parallel_for(int n, int threads, const auto& fn) {
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int lo = t * chunk;
        const int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

int position_in(const std::vector<int>& members, int j) {
    for (std::size_t r = 0; r < members.size(); ++r)
        if (members[r] == j) return static_cast<int>(r);
    throw std::logic_error("inverted index inconsistent with member lists");
}

// Member slots sorted by member index. All member sums run in this canonical
// order so that neighborhoods with equal member sets accumulate identically
// (bit-exact equal weights in the k = n case).
std::vector<int> ascending_member_slots(const std::vector<int>& members) {
    std::vector<int> slots(members.size());
    for (std::size_t r = 0; r < slots.size(); ++r) slots[r] = static_cast<int>(r);
    std::sort(slots.begin(), slots.end(),
              [&members](int a, int b) { return members[a] < members[b]; });
    return slots;
}

}  // namespace

std::pair<ModelParams, TrainState> init_state(const DatasetSplit& data,
                                              const NeighborhoodIndex& index,
                                              const TrainConfig& cfg) {
    cfg.validate();
    data.validate();
    if (index.n != data.n()) throw std::invalid_argument("index does not match dataset size");
    if (index.k != cfg.k) throw std::invalid_argument("index k does not match config k");

    const int n = data.n();
    const std::size_t m = data.desc.joint_dim(data.dim());

    ModelParams params;
    params.w.assign(n, std::vector<double>(m, 0.0));
    params.desc = data.desc;
    params.kind = data.kind;
    params.k = cfg.k;

    TrainState state;
    state.y.resize(n);
    state.labeled_mask.assign(n, false);
    for (const auto& [i, y] : data.labeled) {
        state.y[i] = y;
        state.labeled_mask[i] = true;
    }

    const StructuredOutput first = enumerate_outputs(data.desc).front();
    for (int i = 0; i < n; ++i) {
        if (state.labeled_mask[i]) continue;
        if (cfg.init_policy == InitPolicy::FirstCandidate) {
            state.y[i] = first;
            continue;
        }
        // NearestLabeled: copy the output of the closest labeled point,
        // ties by ascending index.
        double best = std::numeric_limits<double>::infinity();
        int best_j = -1;
        for (const auto& [j, y] : data.labeled) {
            const double dist = squared_distance(data.X[i], data.X[j]);
            if (dist < best) {
                best = dist;
                best_j = j;
            }
        }
        state.y[i] = data.labeled.at(best_j);
    }
    return {std::move(params), std::move(state)};
}

void update_bounds(const ModelParams& params, TrainState& state, const DatasetSplit& data,
                   const NeighborhoodIndex& index, int threads) {
    const int n = index.n;
    const auto candidates = enumerate_outputs(params.desc);
    if (state.z.empty()) state.z.resize(n);
    parallel_for(n, threads, [&](int i) {
        auto& zi = state.z[i];
        const auto& members = index.members[i];
        zi.resize(members.size());
        for (std::size_t r = 0; r < members.size(); ++r) {
            const int j = members[r];
            zi[r] = loss_aug_argmax(params.w[i], params.desc, params.kind, data.X[j], state.y[j],
                                    candidates)
                        .z;
        }
    });
}

void update_weights(ModelParams& params, const TrainState& state, const DatasetSplit& data,
                    const NeighborhoodIndex& index, const TrainConfig& cfg) {
    const int n = index.n;
    const double damping = 1.0 - cfg.eta * cfg.C;
    const double step = cfg.eta / static_cast<double>(cfg.k);
    parallel_for(n, cfg.threads, [&](int i) {
        auto& w = params.w[i];
        for (double& v : w) v *= damping;
        JointFeature phi;
        const auto& members = index.members[i];
        for (int r : ascending_member_slots(members)) {
            const int j = members[r];
            joint_feature_into(params.desc, data.X[j], state.y[j], phi);
            for (std::size_t f = 0; f < w.size(); ++f) w[f] += step * phi[f];
            joint_feature_into(params.desc, data.X[j], state.z[i][r], phi);
            for (std::size_t f = 0; f < w.size(); ++f) w[f] -= step * phi[f];
        }
    });
}

int update_outputs(const ModelParams& params, TrainState& state, const DatasetSplit& data,
                   const NeighborhoodIndex& index) {
    const auto candidates = enumerate_outputs(params.desc);
    const double inv_k = 1.0 / static_cast<double>(params.k);
    int changed = 0;

    JointFeature phi;
    for (int i = 0; i < index.n; ++i) {
        if (state.labeled_mask[i]) {
            const auto& given = data.labeled.at(i);
            if (!(state.y[i] == given)) {
                state.y[i] = given;
                ++changed;
            }
            continue;
        }

        // Bound parameters of every neighborhood that contains x_i.
        const auto& owners = index.inverted[i];
        std::vector<const StructuredOutput*> zs;
        zs.reserve(owners.size());
        for (int owner : owners)
            zs.push_back(&state.z[owner][position_in(index.members[owner], i)]);

        std::size_t best = 0;
        double best_value = 0.0;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            joint_feature_into(params.desc, data.X[i], candidates[c], phi);
            double value = 0.0;
            for (std::size_t o = 0; o < owners.size(); ++o)
                value += inv_k * (loss(params.kind, params.desc, candidates[c], *zs[o]) -
                                  score(params.w[owners[o]], phi));
            if (c == 0 || value < best_value) {
                best = c;
                best_value = value;
            }
        }
        if (!(state.y[i] == candidates[best])) {
            state.y[i] = candidates[best];
            ++changed;
        }
    }
    return changed;
}

double objective(const ModelParams& params, const TrainState& state, const DatasetSplit& data,
                 const NeighborhoodIndex& index, double C) {
    const double inv_k = 1.0 / static_cast<double>(params.k);
    double total = 0.0;
    JointFeature phi;
    for (int i = 0; i < index.n; ++i) {
        const auto& w = params.w[i];
        const auto& members = index.members[i];
        double bound_sum = 0.0;
        for (int r : ascending_member_slots(members)) {
            const int j = members[r];
            const auto& z = state.z[i][r];
            joint_feature_into(params.desc, data.X[j], z, phi);
            double term = score(w, phi);
            joint_feature_into(params.desc, data.X[j], state.y[j], phi);
            term -= score(w, phi);
            bound_sum += term + loss(params.kind, params.desc, state.y[j], z);
        }
        double norm2 = 0.0;
        for (double v : w) norm2 += v * v;
        total += inv_k * bound_sum + 0.5 * C * norm2;
    }
    return total;
}

std::pair<ModelParams, TrainState> train(const DatasetSplit& data, const TrainConfig& cfg) {
    const NeighborhoodIndex index = build_index(data.X, cfg.k);
    auto [params, state] = init_state(data, index, cfg);

    for (int t = 1; t <= cfg.iterations; ++t) {
        update_bounds(params, state, data, index, cfg.threads);
        update_weights(params, state, data, index, cfg);
        for (const auto& w : params.w)
            for (double v : w)
                if (!std::isfinite(v)) throw TrainingDiverged(t);
        const int changed = update_outputs(params, state, data, index);
        const double obj = objective(params, state, data, index, cfg.C);
        state.objective_trace.push_back(obj);
        state.log.push_back({t, obj, changed});
    }
    return {std::move(params), std::move(state)};
}

}  // namespace sslsop
