#include "sslsop/structured.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sslsop {

std::string to_string(OutputFamily family) {
    switch (family) {
        case OutputFamily::Multiclass: return "multiclass";
        case OutputFamily::TreeLeaf: return "tree_leaf";
        case OutputFamily::TagSequence: return "tag_sequence";
    }
    return "?";
}

std::string to_string(LossKind kind) {
    switch (kind) {
        case LossKind::ZeroOne: return "zero_one";
        case LossKind::TreeAncestorHeight: return "tree_ancestor_height";
        case LossKind::Hamming: return "hamming";
    }
    return "?";
}

SpaceTooLarge::SpaceTooLarge(std::uint64_t size_, std::uint64_t cap_)
    : std::runtime_error("candidate space size " + std::to_string(size_) +
                         " exceeds enumeration cap " + std::to_string(cap_)),
      size(size_),
      cap(cap_) {}

OutputDescriptor OutputDescriptor::multiclass(int num_classes, std::uint64_t enumeration_cap) {
    if (num_classes < 2)
        throw std::invalid_argument("multiclass needs K >= 2, got " + std::to_string(num_classes));
    OutputDescriptor d;
    d.family_ = OutputFamily::Multiclass;
    d.num_classes_ = num_classes;
    d.cap_ = enumeration_cap;
    return d;
}

OutputDescriptor OutputDescriptor::tree_leaf(std::vector<int> parent, std::vector<int> leaves,
                                             std::uint64_t enumeration_cap) {
    const int n = static_cast<int>(parent.size());
    if (n < 2) throw std::invalid_argument("label tree needs at least two nodes");

    int root = -1;
    for (int v = 0; v < n; ++v) {
        const int p = parent[v];
        if (p == -1) {
            if (root != -1) throw std::invalid_argument("label tree has more than one root");
            root = v;
        } else if (p < 0 || p >= n) {
            throw std::invalid_argument("node " + std::to_string(v) + " has parent " +
                                        std::to_string(p) + " outside [0," + std::to_string(n) + ")");
        }
    }
    if (root == -1) throw std::invalid_argument("label tree has no root (parent -1)");

    // Depth by walking up; more than n steps means a parent cycle.
    std::vector<int> depth(n, -1);
    for (int v = 0; v < n; ++v) {
        int steps = 0;
        int cur = v;
        while (cur != root) {
            cur = parent[cur];
            if (++steps > n) throw std::invalid_argument("label tree parent array contains a cycle");
        }
        depth[v] = steps;
    }

    std::vector<char> has_child(n, 0);
    for (int v = 0; v < n; ++v)
        if (v != root) has_child[parent[v]] = 1;

    if (leaves.empty()) throw std::invalid_argument("label tree needs a nonempty leaf list");
    std::sort(leaves.begin(), leaves.end());
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        const int v = leaves[i];
        if (v < 0 || v >= n)
            throw std::invalid_argument("leaf id " + std::to_string(v) + " is not a node");
        if (has_child[v])
            throw std::invalid_argument("leaf id " + std::to_string(v) + " has children");
        if (i > 0 && leaves[i - 1] == v)
            throw std::invalid_argument("duplicate leaf id " + std::to_string(v));
    }

    // Height = max edge count down to any childless descendant. Every
    // childless node is height 0; propagate maxima up the parent chain.
    std::vector<int> height(n, 0);
    for (int v = 0; v < n; ++v) {
        if (has_child[v]) continue;
        int cur = v;
        int h = 0;
        while (cur != root) {
            cur = parent[cur];
            ++h;
            height[cur] = std::max(height[cur], h);
        }
    }

    OutputDescriptor d;
    d.family_ = OutputFamily::TreeLeaf;
    d.parent_ = std::move(parent);
    d.leaves_ = std::move(leaves);
    d.root_ = root;
    d.depth_ = std::move(depth);
    d.height_ = std::move(height);
    d.cap_ = enumeration_cap;
    return d;
}

OutputDescriptor OutputDescriptor::tag_sequence(int num_tags, int length,
                                                std::uint64_t enumeration_cap) {
    if (num_tags < 2)
        throw std::invalid_argument("tag sequence needs T >= 2, got " + std::to_string(num_tags));
    if (length < 1)
        throw std::invalid_argument("tag sequence needs L >= 1, got " + std::to_string(length));
    OutputDescriptor d;
    d.family_ = OutputFamily::TagSequence;
    d.num_tags_ = num_tags;
    d.seq_length_ = length;
    d.cap_ = enumeration_cap;
    return d;
}

namespace {

void require_family(const OutputDescriptor& desc, OutputFamily want, const char* what) {
    if (desc.family() != want)
        throw std::invalid_argument(std::string(what) + " requires a " + to_string(want) +
                                    " descriptor, got " + to_string(desc.family()));
}

}  // namespace

int OutputDescriptor::num_classes() const {
    require_family(*this, OutputFamily::Multiclass, "num_classes");
    return num_classes_;
}

int OutputDescriptor::node_count() const {
    require_family(*this, OutputFamily::TreeLeaf, "node_count");
    return static_cast<int>(parent_.size());
}

const std::vector<int>& OutputDescriptor::parent() const {
    require_family(*this, OutputFamily::TreeLeaf, "parent");
    return parent_;
}

const std::vector<int>& OutputDescriptor::leaves() const {
    require_family(*this, OutputFamily::TreeLeaf, "leaves");
    return leaves_;
}

int OutputDescriptor::root() const {
    require_family(*this, OutputFamily::TreeLeaf, "root");
    return root_;
}

int OutputDescriptor::node_depth(int node) const {
    require_family(*this, OutputFamily::TreeLeaf, "node_depth");
    return depth_.at(node);
}

int OutputDescriptor::node_height(int node) const {
    require_family(*this, OutputFamily::TreeLeaf, "node_height");
    return height_.at(node);
}

int OutputDescriptor::num_tags() const {
    require_family(*this, OutputFamily::TagSequence, "num_tags");
    return num_tags_;
}

int OutputDescriptor::seq_length() const {
    require_family(*this, OutputFamily::TagSequence, "seq_length");
    return seq_length_;
}

std::uint64_t OutputDescriptor::space_size() const {
    switch (family_) {
        case OutputFamily::Multiclass:
            return static_cast<std::uint64_t>(num_classes_);
        case OutputFamily::TreeLeaf:
            return static_cast<std::uint64_t>(leaves_.size());
        case OutputFamily::TagSequence: {
            const auto kMax = std::numeric_limits<std::uint64_t>::max();
            std::uint64_t size = 1;
            for (int p = 0; p < seq_length_; ++p) {
                if (size > kMax / static_cast<std::uint64_t>(num_tags_)) return kMax;
                size *= static_cast<std::uint64_t>(num_tags_);
            }
            return size;
        }
    }
    return 0;
}

std::size_t OutputDescriptor::joint_dim(std::size_t d) const {
    if (d == 0) throw std::invalid_argument("feature dimension must be positive");
    switch (family_) {
        case OutputFamily::Multiclass:
            return d * static_cast<std::size_t>(num_classes_);
        case OutputFamily::TreeLeaf:
            return d * parent_.size();
        case OutputFamily::TagSequence: {
            const auto L = static_cast<std::size_t>(seq_length_);
            const auto T = static_cast<std::size_t>(num_tags_);
            if (d % L != 0)
                throw std::invalid_argument("feature dimension " + std::to_string(d) +
                                            " is not divisible by sequence length " +
                                            std::to_string(L));
            return T * T + T * (d / L);
        }
    }
    return 0;
}

bool OutputDescriptor::valid_output(const StructuredOutput& y) const {
    switch (family_) {
        case OutputFamily::Multiclass:
            return y.payload.size() == 1 && y.payload[0] >= 0 && y.payload[0] < num_classes_;
        case OutputFamily::TreeLeaf:
            return y.payload.size() == 1 &&
                   std::binary_search(leaves_.begin(), leaves_.end(), y.payload[0]);
        case OutputFamily::TagSequence: {
            if (y.payload.size() != static_cast<std::size_t>(seq_length_)) return false;
            for (int t : y.payload)
                if (t < 0 || t >= num_tags_) return false;
            return true;
        }
    }
    return false;
}

void OutputDescriptor::require_valid(const StructuredOutput& y) const {
    if (!valid_output(y))
        throw std::invalid_argument("structured output is not a member of the " +
                                    to_string(family_) + " space");
}

bool OutputDescriptor::same_space(const OutputDescriptor& other) const {
    if (family_ != other.family_) return false;
    switch (family_) {
        case OutputFamily::Multiclass:
            return num_classes_ == other.num_classes_;
        case OutputFamily::TreeLeaf:
            return parent_ == other.parent_ && leaves_ == other.leaves_;
        case OutputFamily::TagSequence:
            return num_tags_ == other.num_tags_ && seq_length_ == other.seq_length_;
    }
    return false;
}

bool OutputDescriptor::operator==(const OutputDescriptor& other) const {
    return same_space(other) && cap_ == other.cap_;
}

std::vector<StructuredOutput> enumerate_outputs(const OutputDescriptor& desc) {
    const std::uint64_t size = desc.space_size();
    if (size == 0) throw std::invalid_argument("uninitialized output descriptor");
    if (size > desc.enumeration_cap()) throw SpaceTooLarge(size, desc.enumeration_cap());

    std::vector<StructuredOutput> out;
    out.reserve(static_cast<std::size_t>(size));
    switch (desc.family()) {
        case OutputFamily::Multiclass:
            for (int c = 0; c < desc.num_classes(); ++c) out.push_back(StructuredOutput::multiclass(c));
            break;
        case OutputFamily::TreeLeaf:
            for (int leaf : desc.leaves()) out.push_back(StructuredOutput::leaf(leaf));
            break;
        case OutputFamily::TagSequence: {
            const int T = desc.num_tags();
            const int L = desc.seq_length();
            std::vector<int> tags(L, 0);
            while (true) {
                out.push_back(StructuredOutput::tags(tags));
                int pos = L - 1;
                while (pos >= 0 && tags[pos] == T - 1) tags[pos--] = 0;
                if (pos < 0) break;
                ++tags[pos];
            }
            break;
        }
    }
    return out;
}

std::vector<double> encode_output(const OutputDescriptor& desc, const StructuredOutput& y) {
    desc.require_valid(y);
    switch (desc.family()) {
        case OutputFamily::Multiclass: {
            std::vector<double> e(desc.num_classes(), 0.0);
            e[y.class_index()] = 1.0;
            return e;
        }
        case OutputFamily::TreeLeaf: {
            std::vector<double> e(desc.node_count(), 0.0);
            int cur = y.leaf_id();
            e[cur] = 1.0;
            while (cur != desc.root()) {
                cur = desc.parent()[cur];
                e[cur] = 1.0;
            }
            return e;
        }
        case OutputFamily::TagSequence:
            throw std::invalid_argument("tag sequences have no indicator coding; use joint_feature");
    }
    return {};
}

void joint_feature_into(const OutputDescriptor& desc, const FeatureVector& x,
                        const StructuredOutput& y, JointFeature& out) {
    desc.require_valid(y);
    const std::size_t d = x.size();
    const std::size_t m = desc.joint_dim(d);
    out.assign(m, 0.0);

    switch (desc.family()) {
        case OutputFamily::Multiclass: {
            const std::size_t b = static_cast<std::size_t>(y.class_index());
            std::copy(x.begin(), x.end(), out.begin() + b * d);
            break;
        }
        case OutputFamily::TreeLeaf: {
            int cur = y.leaf_id();
            std::copy(x.begin(), x.end(), out.begin() + static_cast<std::size_t>(cur) * d);
            while (cur != desc.root()) {
                cur = desc.parent()[cur];
                std::copy(x.begin(), x.end(), out.begin() + static_cast<std::size_t>(cur) * d);
            }
            break;
        }
        case OutputFamily::TagSequence: {
            const std::size_t T = static_cast<std::size_t>(desc.num_tags());
            const std::size_t L = static_cast<std::size_t>(desc.seq_length());
            const std::size_t seg = d / L;
            const auto& tags = y.tags();
            for (std::size_t p = 0; p + 1 < L; ++p)
                out[static_cast<std::size_t>(tags[p]) * T + static_cast<std::size_t>(tags[p + 1])] += 1.0;
            for (std::size_t p = 0; p < L; ++p) {
                double* block = out.data() + T * T + static_cast<std::size_t>(tags[p]) * seg;
                const double* seg_x = x.data() + p * seg;
                for (std::size_t f = 0; f < seg; ++f) block[f] += seg_x[f];
            }
            break;
        }
    }
}

JointFeature joint_feature(const OutputDescriptor& desc, const FeatureVector& x,
                           const StructuredOutput& y) {
    JointFeature out;
    joint_feature_into(desc, x, y, out);
    return out;
}

double loss(LossKind kind, const OutputDescriptor& desc, const StructuredOutput& y,
            const StructuredOutput& y2) {
    desc.require_valid(y);
    desc.require_valid(y2);
    switch (kind) {
        case LossKind::ZeroOne:
            return y == y2 ? 0.0 : 1.0;
        case LossKind::TreeAncestorHeight: {
            require_family(desc, OutputFamily::TreeLeaf, "tree ancestor loss");
            if (y == y2) return 0.0;
            int a = y.leaf_id();
            int b = y2.leaf_id();
            while (desc.node_depth(a) > desc.node_depth(b)) a = desc.parent()[a];
            while (desc.node_depth(b) > desc.node_depth(a)) b = desc.parent()[b];
            while (a != b) {
                a = desc.parent()[a];
                b = desc.parent()[b];
            }
            return static_cast<double>(desc.node_height(a));
        }
        case LossKind::Hamming: {
            require_family(desc, OutputFamily::TagSequence, "hamming loss");
            const auto& a = y.tags();
            const auto& b = y2.tags();
            int diff = 0;
            for (std::size_t p = 0; p < a.size(); ++p) diff += a[p] != b[p];
            return static_cast<double>(diff) / static_cast<double>(a.size());
        }
    }
    return 0.0;
}

double score(std::span<const double> w, std::span<const double> phi) {
    if (w.size() != phi.size())
        throw std::invalid_argument("score: weight length " + std::to_string(w.size()) +
                                    " != feature length " + std::to_string(phi.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * phi[i];
    return s;
}

StructuredOutput argmax_output(const std::vector<double>& w, const OutputDescriptor& desc,
                               const FeatureVector& x) {
    const auto candidates = enumerate_outputs(desc);
    JointFeature phi;
    std::size_t best = 0;
    double best_score = 0.0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        joint_feature_into(desc, x, candidates[c], phi);
        const double s = score(w, phi);
        if (c == 0 || s > best_score) {
            best = c;
            best_score = s;
        }
    }
    return candidates[best];
}

LossAugResult loss_aug_argmax(const std::vector<double>& w, const OutputDescriptor& desc,
                              LossKind kind, const FeatureVector& x, const StructuredOutput& y) {
    return loss_aug_argmax(w, desc, kind, x, y, enumerate_outputs(desc));
}

LossAugResult loss_aug_argmax(const std::vector<double>& w, const OutputDescriptor& desc,
                              LossKind kind, const FeatureVector& x, const StructuredOutput& y,
                              const std::vector<StructuredOutput>& candidates) {
    if (candidates.empty()) throw std::invalid_argument("empty candidate list");
    JointFeature phi;
    joint_feature_into(desc, x, y, phi);
    const double base = score(w, phi);

    std::size_t best = 0;
    double best_value = 0.0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        joint_feature_into(desc, x, candidates[c], phi);
        const double value = score(w, phi) - base + loss(kind, desc, y, candidates[c]);
        if (c == 0 || value > best_value) {
            best = c;
            best_value = value;
        }
    }
    return {candidates[best], best_value};
}

bool loss_valid_for(LossKind kind, OutputFamily family) {
    switch (kind) {
        case LossKind::ZeroOne: return true;
        case LossKind::TreeAncestorHeight: return family == OutputFamily::TreeLeaf;
        case LossKind::Hamming: return family == OutputFamily::TagSequence;
    }
    return false;
}

}  // namespace sslsop
