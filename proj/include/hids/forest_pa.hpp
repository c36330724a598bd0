#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hids/common.hpp"
#include "hids/dataset.hpp"
#include "hids/rep_tree.hpp"

namespace hids {

/// Per-feature split-selection multipliers. A feature tested by the
/// previous tree gets a depth-indexed penalty; untested features recover
/// toward 1 by the increment rate.
struct AttributeWeights {
    std::vector<double> weights;             // each in (0, 1]
    std::vector<uint32_t> last_tested_depth;  // 0: never tested

    static AttributeWeights uniform(size_t width);
};

struct PaTreeParams {
    size_t tree_count = 30;
    size_t min_leaf = 2;
    size_t max_depth = 0;  // 0: unlimited
    double weight_increment_rate = 0.2;
    uint64_t seed = 0;

    void validate() const;
};

struct ForestPaModel {
    std::vector<Tree> trees;
    std::vector<uint64_t> tree_seeds;
    std::vector<std::vector<double>> weight_trace;  // weights each tree grew with
    AttributeWeights final_weights;
    std::vector<std::string> classes;
    size_t width = 0;
    PaTreeParams params;

    int32_t predict(std::span<const double> x) const;
    /// Predicted class plus the per-class vote tally (sums to tree_count).
    int32_t predict_votes(std::span<const double> x, std::vector<uint32_t>& votes) const;

    void save(std::ostream& out) const;
    static ForestPaModel load(std::istream& in);
};

/// n seeded draws with replacement from [0, n).
std::vector<uint32_t> bootstrap_indices(size_t n, uint64_t seed);

/// Materialized bootstrap resample; provenance records the seed.
Dataset bootstrap_sample(const Dataset& data, uint64_t seed);

inline double weighted_split_merit(double gain, double weight) { return gain * weight; }

/// Applies the post-tree weight update: a feature tested at minimum depth
/// d (root = 1) redraws its weight uniformly from [(d-1)/(d+1), d/(d+1))
/// clamped to [0.01, 1]; an untested feature recovers toward 1 as
/// w <- 1 - (1 - w)(1 - rate). Draws happen in feature-index order off
/// the shared weight stream.
void penalize_and_refresh(AttributeWeights& weights, const Tree& latest_tree, double rate,
                          SplitMix64& rng);

/// Sequential bagging: tree i grows unpruned on a bootstrap seeded with
/// master seed + i, scoring splits by gain x current weight, then the
/// weights are penalized and refreshed.
ForestPaModel train_forest(const Dataset& data, const PaTreeParams& params);

}  // namespace hids
