#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hids/common.hpp"
#include "hids/dataset.hpp"

namespace hids::test {

inline Dataset make_dataset(std::vector<std::string> feature_names,
                            const std::vector<std::pair<std::vector<double>, std::string>>& rows) {
    DatasetSchema schema;
    schema.feature_names = std::move(feature_names);
    schema.feature_kinds.assign(schema.feature_names.size(), FeatureKind::numeric);
    schema.label_column = "Label";
    for (const auto& [values, label] : rows) {
        bool known = false;
        for (const auto& l : schema.fine_labels) known = known || l == label;
        if (!known) schema.fine_labels.push_back(label);
    }
    Dataset data(schema);
    for (const auto& [values, label] : rows) {
        int32_t idx = 0;
        while (schema.fine_labels[static_cast<size_t>(idx)] != label) ++idx;
        data.append_row(values, idx);
    }
    return data;
}

inline std::vector<std::string> feature_names(size_t width) {
    std::vector<std::string> names;
    for (size_t i = 0; i < width; ++i) names.push_back("f" + std::to_string(i));
    return names;
}

/// Labels are a deterministic threshold function of the features, so the
/// dataset is consistent by construction.
inline Dataset random_consistent_dataset(uint64_t seed, size_t n_rows, size_t width,
                                         size_t n_classes) {
    SplitMix64 rng(seed);
    std::vector<std::pair<std::vector<double>, std::string>> rows;
    rows.reserve(n_rows);
    for (size_t i = 0; i < n_rows; ++i) {
        std::vector<double> x(width);
        for (auto& v : x) v = rng.unit();
        size_t c = 0;
        for (size_t f = 0; f < width; ++f)
            if (x[f] > 0.5) c = c * 2 + 1;
        rows.emplace_back(std::move(x), "c" + std::to_string(c % n_classes));
    }
    return make_dataset(feature_names(width), rows);
}

/// Labels drawn independently of the features (worst case for learners,
/// useful for pruning and description-length stress).
inline Dataset random_noise_dataset(uint64_t seed, size_t n_rows, size_t width,
                                    size_t n_classes) {
    SplitMix64 rng(seed);
    std::vector<std::pair<std::vector<double>, std::string>> rows;
    rows.reserve(n_rows);
    for (size_t i = 0; i < n_rows; ++i) {
        std::vector<double> x(width);
        for (auto& v : x) v = rng.unit();
        rows.emplace_back(std::move(x), "c" + std::to_string(rng.below(n_classes)));
    }
    return make_dataset(feature_names(width), rows);
}

/// Two-condition target: positive iff x0 > 0.5 and x1 <= 0.3.
inline Dataset planted_rule_dataset(uint64_t seed, size_t n_rows, size_t width) {
    SplitMix64 rng(seed);
    std::vector<std::pair<std::vector<double>, std::string>> rows;
    rows.reserve(n_rows);
    for (size_t i = 0; i < n_rows; ++i) {
        std::vector<double> x(width);
        for (auto& v : x) v = rng.unit();
        bool pos = x[0] > 0.5 && x[1] <= 0.3;
        rows.emplace_back(std::move(x), pos ? "POS" : "NEG");
    }
    return make_dataset(feature_names(width), rows);
}

inline std::vector<uint32_t> all_rows(const Dataset& data) {
    std::vector<uint32_t> rows(data.size());
    for (size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<uint32_t>(i);
    return rows;
}

}  // namespace hids::test
