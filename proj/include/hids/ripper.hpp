#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hids/dataset.hpp"

namespace hids {

struct Condition {
    int32_t feature = 0;
    bool is_leq = true;  // x[feature] <= threshold, otherwise >
    double threshold = 0.0;

    bool matches(std::span<const double> x) const {
        double v = x[static_cast<size_t>(feature)];
        return is_leq ? v <= threshold : v > threshold;
    }
};

struct Rule {
    std::vector<Condition> conditions;  // conjunction; empty matches all
    int32_t target = -1;

    bool matches(std::span<const double> x) const {
        for (const auto& c : conditions)
            if (!c.matches(x)) return false;
        return true;
    }
};

struct RipperParams {
    double prune_fraction = 1.0 / 3.0;
    size_t optimization_passes = 2;
    double dl_slack_bits = 64.0;
    size_t min_rule_coverage = 2;
    uint64_t seed = 0;

    void validate() const;
};

struct RuleSet {
    std::vector<Rule> rules;  // first-match order
    int32_t default_class = 0;
    std::vector<int32_t> class_order;  // learning order, rarest first
    std::vector<std::string> classes;
    size_t width = 0;
    RipperParams params;

    int32_t predict(std::span<const double> x) const;

    void save(std::ostream& out) const;
    static RuleSet load(std::istream& in);
};

/// FOIL information gain for refining a rule from coverage (p0, n0) to
/// (p1, n1): p1 * (log2(p1/(p1+n1)) - log2(p0/(p0+n0))). Throws
/// InputError when p1 is zero (a dead refinement).
double foil_gain(uint64_t p0, uint64_t n0, uint64_t p1, uint64_t n1);

/// Greedy conjunction growth over `rows`, maximizing FOIL gain per added
/// condition, until no negatives are covered or no refinement has
/// positive gain. Ties: lowest feature, smallest threshold, <= before >.
Rule grow_rule(const Dataset& data, std::span<const uint32_t> rows, int32_t target);

/// Extends `seed_rule` with further grown conditions over `rows`.
Rule grow_rule_from(const Dataset& data, std::span<const uint32_t> rows, Rule seed_rule);

/// Keeps the condition prefix maximizing v = (p - n)/(p + n) over the
/// prune rows (ties keep the shorter rule). A rule covering nothing on
/// the prune rows is returned unchanged (its metric is taken as -1).
Rule prune_rule(const Rule& rule, const Dataset& data, std::span<const uint32_t> prune_rows);

/// Number of distinct threshold conditions available over `rows` (two
/// directions per distinct-value boundary, summed over features).
double count_candidate_conditions(const Dataset& data, std::span<const uint32_t> rows);

/// Description length in bits of a one-class rule list over `rows`:
/// per-rule model bits (conditions coded against the candidate pool plus
/// a length prior) plus binomial exception coding of false positives and
/// false negatives. `n_candidates` < 0 recomputes the pool size.
double ruleset_description_length(const std::vector<Rule>& rules, const Dataset& data,
                                  std::span<const uint32_t> rows, int32_t target,
                                  double n_candidates = -1.0);

/// Sequential covering, rarest class first; the most frequent class
/// becomes the ruleless default. Per rule: seeded stratified grow/prune
/// split, grow, prune, description-length acceptance, covered rows
/// removed. Ends with `optimization_passes` rounds of per-rule
/// replacement/revision, keeping the DL-minimal variant.
RuleSet train_ripper(const Dataset& data, const RipperParams& params);

}  // namespace hids
