#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hids {

/// Rows are actual classes, columns predicted. Vocabulary puts BENIGN
/// first when present.
struct ConfusionMatrix {
    std::vector<std::string> vocabulary;
    std::vector<uint64_t> counts;  // row-major |C| x |C|

    uint64_t at(size_t actual, size_t predicted) const {
        return counts[actual * vocabulary.size() + predicted];
    }
    uint64_t& at(size_t actual, size_t predicted) {
        return counts[actual * vocabulary.size() + predicted];
    }
    uint64_t total() const;
    uint64_t trace() const;
    uint64_t row_total(size_t actual) const;
    std::optional<size_t> benign_index() const;
};

ConfusionMatrix confusion(std::span<const int32_t> predictions, std::span<const int32_t> truths,
                          std::vector<std::string> vocabulary);

/// TP / (TP + FN) for one class; nullopt when the class has no actual
/// records (undefined, not zero).
std::optional<double> dr_per_class(const ConfusionMatrix& cm, size_t class_index);

/// TN / (TN + FP) over the BENIGN row. Throws when BENIGN is absent or
/// has no actual records.
double tnr(const ConfusionMatrix& cm);

/// 1 - tnr, so the two always sum to 1 exactly.
double far(const ConfusionMatrix& cm);

/// Exact-type detections over all actual attack rows.
double dr_overall(const ConfusionMatrix& cm);

/// Full diagonal mass over total records.
double accuracy(const ConfusionMatrix& cm);

struct MetricsReport {
    std::vector<std::string> vocabulary;
    std::vector<uint64_t> counts;  // confusion snapshot
    std::optional<double> tnr_value;
    std::optional<double> far_value;
    std::optional<double> dr_overall_value;
    double accuracy_value = 0.0;
    // (class name, rate) for attack classes with actual records, in
    // vocabulary order.
    std::vector<std::pair<std::string, double>> per_attack_dr;
    std::optional<double> train_seconds;
    std::optional<double> test_seconds;

    bool operator==(const MetricsReport&) const = default;
};

MetricsReport build_report(const ConfusionMatrix& cm);

/// Line-oriented key/value rendering; parse_kv inverts it exactly.
void emit_kv(const MetricsReport& report, std::ostream& out);
MetricsReport parse_kv(std::istream& in);

/// Aligned human table: TNR (BENIGN) first, per-attack DR rows, then
/// FAR, DR (Overall), Accuracy and timings. Percentages to 3 decimals.
void emit_table(const MetricsReport& report, std::ostream& out);

}  // namespace hids
