#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hids {

enum class FeatureKind : uint8_t { numeric, categorical };

struct DatasetSchema {
    std::vector<std::string> feature_names;
    std::vector<FeatureKind> feature_kinds;  // parallel to feature_names
    std::string label_column;
    std::vector<std::string> fine_labels;
    // Set when the header carries the CICIDS2017 flow layout; selects the
    // "Flow Packets/s"-only marker cleaning rule.
    bool cicids_layout = false;

    size_t width() const { return feature_names.size(); }
    std::optional<size_t> feature_index(std::string_view name) const;
    std::optional<int32_t> label_index(std::string_view name) const;

    /// Enforces: unique non-empty feature names, label column not a feature.
    void validate() const;
};

/// Maps fine-grained labels onto the coarser label space a classifier
/// trains against.
struct LabelView {
    enum class Kind : uint8_t { binary, category, fine };

    Kind kind = Kind::fine;
    std::vector<int32_t> mapping;  // fine index -> view index, total
    std::vector<std::string> vocabulary;

    int32_t map(int32_t fine_index) const { return mapping[static_cast<size_t>(fine_index)]; }

    /// {BENIGN, Attack}: BENIGN maps to itself, everything else to Attack.
    static LabelView binary(const std::vector<std::string>& fine_labels);
    /// The seven-way attack grouping over CICIDS2017 label names. Throws
    /// InputError on a fine label outside the known grouping.
    static LabelView category(const std::vector<std::string>& fine_labels);
    /// Identity view.
    static LabelView fine(const std::vector<std::string>& fine_labels);

    /// True when every fine label has a defined category grouping.
    static bool category_mappable(const std::vector<std::string>& fine_labels);
};

struct FlowRecord {
    std::vector<double> values;
    int32_t fine_label = -1;
};

/// Ordered, immutable-after-construction record collection. Values are
/// stored row-major; the textual markers "Infinity"/"NaN" live in-band as
/// the IEEE values until `clean` removes the rows carrying them.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(DatasetSchema schema);

    const DatasetSchema& schema() const { return schema_; }
    DatasetSchema& mutable_schema() { return schema_; }

    size_t size() const { return fine_labels_.size(); }
    bool empty() const { return fine_labels_.empty(); }
    size_t width() const { return schema_.width(); }

    void reserve(size_t rows);
    void append(const FlowRecord& record);
    void append_row(std::span<const double> values, int32_t fine_label);

    std::span<const double> row(size_t i) const {
        return {values_.data() + i * width(), width()};
    }
    double value(size_t i, size_t feature) const { return values_[i * width() + feature]; }
    int32_t fine_label(size_t i) const { return fine_labels_[i]; }
    const std::string& fine_label_name(size_t i) const {
        return schema_.fine_labels[static_cast<size_t>(fine_labels_[i])];
    }

    // Active label view: what a learner sees as the label column. Defaults
    // to the fine (identity) view.
    const LabelView& view() const { return view_; }
    void set_view(LabelView v);
    int32_t view_label(size_t i) const { return view_.map(fine_labels_[i]); }
    const std::string& view_label_name(size_t i) const {
        return view_.vocabulary[static_cast<size_t>(view_label(i))];
    }
    const std::vector<std::string>& view_vocab() const { return view_.vocabulary; }

    const std::vector<std::string>& provenance() const { return provenance_; }
    void note(std::string line) { provenance_.push_back(std::move(line)); }
    void set_provenance(std::vector<std::string> lines) { provenance_ = std::move(lines); }

    // Mutating hooks for the preprocessing ops (they own the invariants).
    std::vector<double>& raw_values() { return values_; }
    const std::vector<double>& raw_values() const { return values_; }
    std::vector<int32_t>& raw_fine_labels() { return fine_labels_; }

private:
    DatasetSchema schema_;
    std::vector<double> values_;
    std::vector<int32_t> fine_labels_;
    LabelView view_;
    std::vector<std::string> provenance_;
};

// --- CICIDS2017 canonical vocabulary -----------------------------------

/// BENIGN plus the fourteen attack names, in the canonical composition
/// order (BENIGN first).
const std::vector<std::string>& cicids2017_fine_labels();

/// Canonical spelling for a raw CICIDS2017 label cell (trims, repairs the
/// mis-encoded dash variants of the Web Attack labels, upcases benign).
std::string canonical_fine_label(std::string_view raw);

/// The eight always-constant CICIDS2017 columns, resolved against the
/// schema's actual spelling ("Fwd Avg Bulk Rate" vs "Fwd Avg Bulk/Rate").
/// Columns already absent are skipped, so cleaning is idempotent.
std::vector<std::string> cicids2017_drop_list(const DatasetSchema& schema);

/// Feature whose markers decide row removal on CICIDS-shaped data.
inline constexpr std::string_view kCicidsMarkerFeature = "Flow Packets/s";

}  // namespace hids
