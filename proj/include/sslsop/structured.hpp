#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sslsop {

// Dense real feature vector of a data point.
using FeatureVector = std::vector<double>;

// Joint representation of an (input, output) pair, scored linearly.
using JointFeature = std::vector<double>;

enum class OutputFamily { Multiclass, TreeLeaf, TagSequence };

enum class LossKind { ZeroOne, TreeAncestorHeight, Hamming };

std::string to_string(OutputFamily family);
std::string to_string(LossKind kind);

// Thrown when the candidate space is too big to materialize. The caller
// can shrink the task (L, T) or raise the descriptor's enumeration cap.
class SpaceTooLarge : public std::runtime_error {
public:
    SpaceTooLarge(std::uint64_t size, std::uint64_t cap);
    std::uint64_t size;
    std::uint64_t cap;
};

// One element of the output space. The payload is family-specific:
// Multiclass holds a single class index, TreeLeaf a single leaf node id,
// TagSequence the L tag indices. Equality is payload equality.
struct StructuredOutput {
    std::vector<int> payload;

    static StructuredOutput multiclass(int class_index) { return {{class_index}}; }
    static StructuredOutput leaf(int node_id) { return {{node_id}}; }
    static StructuredOutput tags(std::vector<int> t) { return {std::move(t)}; }

    int class_index() const { return payload.at(0); }
    int leaf_id() const { return payload.at(0); }
    const std::vector<int>& tags() const { return payload; }

    bool operator==(const StructuredOutput&) const = default;
    auto operator<=>(const StructuredOutput&) const = default;
};

// Declares an output space and its canonical candidate enumeration.
//
// Families:
//   Multiclass(K)          — class indices 0..K-1
//   TreeLeaf(parent, leaves) — leaves of a rooted label tree; parent[v] is
//                              the parent node id, -1 marks the single root
//   TagSequence(T, L)      — length-L sequences over tags 0..T-1
class OutputDescriptor {
public:
    static constexpr std::uint64_t kDefaultEnumerationCap = 65536;

    // Placeholder with an empty space; fill via one of the factories below.
    OutputDescriptor() = default;

    static OutputDescriptor multiclass(int num_classes,
                                       std::uint64_t enumeration_cap = kDefaultEnumerationCap);
    static OutputDescriptor tree_leaf(std::vector<int> parent, std::vector<int> leaves,
                                      std::uint64_t enumeration_cap = kDefaultEnumerationCap);
    static OutputDescriptor tag_sequence(int num_tags, int length,
                                         std::uint64_t enumeration_cap = kDefaultEnumerationCap);

    OutputFamily family() const { return family_; }
    std::uint64_t enumeration_cap() const { return cap_; }

    int num_classes() const;             // Multiclass
    int node_count() const;              // TreeLeaf
    const std::vector<int>& parent() const;
    const std::vector<int>& leaves() const;
    int root() const;
    int node_depth(int node) const;      // edges up to the root
    int node_height(int node) const;     // max edges down to a descendant leaf
    int num_tags() const;                // TagSequence
    int seq_length() const;

    // |Y|, saturated at uint64 max for huge sequence spaces.
    std::uint64_t space_size() const;

    // Joint feature dimension m for input dimension d. Throws on invalid d
    // (sequences require d divisible by L).
    std::size_t joint_dim(std::size_t d) const;

    bool valid_output(const StructuredOutput& y) const;
    void require_valid(const StructuredOutput& y) const;

    // Same family and same structural parameters; ignores the enumeration cap.
    bool same_space(const OutputDescriptor& other) const;
    bool operator==(const OutputDescriptor& other) const;

private:
    OutputFamily family_ = OutputFamily::Multiclass;
    std::uint64_t cap_ = kDefaultEnumerationCap;
    int num_classes_ = 0;
    std::vector<int> parent_;
    std::vector<int> leaves_;        // ascending
    int root_ = -1;
    std::vector<int> depth_;
    std::vector<int> height_;
    int num_tags_ = 0;
    int seq_length_ = 0;
};

// Materializes Y in canonical order: Multiclass ascending class index,
// TreeLeaf ascending leaf id, TagSequence lexicographic. Deterministic.
// Throws SpaceTooLarge when |Y| exceeds the descriptor's cap.
std::vector<StructuredOutput> enumerate_outputs(const OutputDescriptor& desc);

// Indicator coding of an output: one-hot (Multiclass) or ancestor-closure
// (TreeLeaf). Sequences have no indicator coding and are rejected.
std::vector<double> encode_output(const OutputDescriptor& desc, const StructuredOutput& y);

// Joint feature map.
//   Multiclass/TreeLeaf: tensor product, output-major blocks —
//     phi[b*d + f] = encode(y)[b] * x[f].
//   TagSequence: T*T bigram transition counts first (entry t*T + t' counts
//     t -> t' over consecutive positions), then per-tag emission blocks of
//     length d/L, block t summing the segments of x at positions tagged t.
JointFeature joint_feature(const OutputDescriptor& desc, const FeatureVector& x,
                           const StructuredOutput& y);

// Same, writing into a caller-owned buffer (resized as needed).
void joint_feature_into(const OutputDescriptor& desc, const FeatureVector& x,
                        const StructuredOutput& y, JointFeature& out);

// Structured loss between two outputs of the same space.
//   ZeroOne: 1 when payloads differ.
//   TreeAncestorHeight: height of the lowest common ancestor, 0 on equality.
//   Hamming: fraction of sequence positions that differ.
double loss(LossKind kind, const OutputDescriptor& desc, const StructuredOutput& y,
            const StructuredOutput& y2);

// Inner product of a weight vector and a joint feature; lengths must match.
double score(std::span<const double> w, std::span<const double> phi);

// Plain argmax predictor: the candidate maximizing score(w, phi(x, y)).
// Ties resolve to the first maximal candidate in canonical order.
StructuredOutput argmax_output(const std::vector<double>& w, const OutputDescriptor& desc,
                               const FeatureVector& x);

struct LossAugResult {
    StructuredOutput z;
    double bound;   // attained maximum; >= 0 and >= loss(y, argmax prediction)
};

// Loss-augmented argmax: maximizes w . (phi(x,y') - phi(x,y)) + loss(y, y')
// over all candidates y'. The attained value upper-bounds the prediction
// loss of argmax_output. First maximal candidate wins ties.
LossAugResult loss_aug_argmax(const std::vector<double>& w, const OutputDescriptor& desc,
                              LossKind kind, const FeatureVector& x,
                              const StructuredOutput& y);

// Same scan over an already-enumerated candidate list (callers with many
// scans per descriptor avoid re-materializing Y).
LossAugResult loss_aug_argmax(const std::vector<double>& w, const OutputDescriptor& desc,
                              LossKind kind, const FeatureVector& x, const StructuredOutput& y,
                              const std::vector<StructuredOutput>& candidates);

// True when the loss kind applies to the descriptor's family.
bool loss_valid_for(LossKind kind, OutputFamily family);

}  // namespace sslsop
