#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hids/dataset.hpp"

namespace hids {

/// Internal node when feature >= 0 (value <= threshold routes left),
/// leaf otherwise. `predicted` is the majority class of the rows that
/// reached the node while growing (ties to the lowest class index);
/// `counts` is that per-class histogram.
struct TreeNode {
    int32_t feature = -1;
    double threshold = 0.0;
    int32_t left = -1;
    int32_t right = -1;
    int32_t predicted = -1;
    std::vector<uint64_t> counts;

    bool is_leaf() const { return feature < 0; }
};

/// Node pool; the root is index 0. Children always carry a higher index
/// than their parent.
struct Tree {
    std::vector<TreeNode> nodes;

    bool empty() const { return nodes.empty(); }
    /// Index of the leaf a record routes to.
    int32_t route(std::span<const double> x) const;
    size_t leaf_count() const;
    /// Minimum depth (root = 1) at which each feature is tested; 0 when
    /// the feature is never tested.
    std::vector<uint32_t> min_test_depth(size_t width) const;
};

struct RepTreeParams {
    size_t min_leaf = 2;
    size_t max_depth = 0;  // 0: unlimited
    // Share of training rows held out for pruning; 0 disables the
    // holdout and yields an unpruned tree.
    double prune_fraction = 1.0 / 3.0;
    uint64_t seed = 0;

    void validate() const;
};

struct BestSplit {
    double threshold = 0.0;
    double gain = 0.0;
};

/// Shannon entropy in bits. Throws InputError when all counts are zero.
double entropy(std::span<const uint64_t> counts);

/// Best single-feature threshold: the midpoint between consecutive
/// distinct sorted values maximizing information gain, smallest threshold
/// on ties. Candidates leaving either side below min_leaf are skipped.
/// Returns nullopt when the feature is constant or no candidate remains.
std::optional<BestSplit> best_numeric_split(std::span<const double> values,
                                            std::span<const int32_t> labels, size_t n_classes,
                                            size_t min_leaf = 1);

struct GrowOptions {
    size_t min_leaf = 2;
    size_t max_depth = 0;
    // Per-feature merit multipliers in (0, 1]; empty means all 1.
    std::span<const double> feature_weights = {};
};

/// Grows a tree over `rows` (indices into `data`) against the active
/// label view by recursive best-merit splitting (merit = gain x weight).
Tree grow_tree(const Dataset& data, std::span<const uint32_t> rows, const GrowOptions& opts);

/// Bottom-up reduced-error pruning: an internal node becomes a majority
/// leaf whenever that does not increase the error count over the prune
/// rows routed to it (ties favor the leaf). Unreachable nodes are
/// compacted away.
void reduced_error_prune(Tree& tree, const Dataset& data, std::span<const uint32_t> prune_rows);

struct RepTreeModel {
    Tree tree;
    std::vector<std::string> classes;
    size_t width = 0;
    RepTreeParams params;
    size_t grow_size = 0;
    size_t prune_size = 0;

    int32_t predict(std::span<const double> x) const;
    /// Predicted class plus the leaf's normalized class distribution.
    int32_t predict_dist(std::span<const double> x, std::vector<double>& dist) const;

    void save(std::ostream& out) const;
    static RepTreeModel load(std::istream& in);
};

/// Seeded shuffle; the first (1 - prune_fraction) share of rows grows the
/// tree and the remainder prunes it.
RepTreeModel train_rep_tree(const Dataset& data, const RepTreeParams& params);

// Shared by the forest container format.
void write_tree(std::ostream& out, const Tree& tree);
Tree read_tree(std::istream& in, size_t n_classes);

}  // namespace hids
