#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hids/common.hpp"
#include "hids/dataset.hpp"

namespace hids {

/// Loads one labeled CSV. The last column (or `label_column` when named in
/// the hint) is the label; all other columns are numeric features. Textual
/// "Infinity"/"NaN" cells become the IEEE values. New label names extend
/// the fine label table in order of first appearance, after canonical
/// spelling repair when the layout is CICIDS-shaped.
struct LoadOptions {
    std::string label_column;       // empty: last column
    bool force_cicids_layout = false;
    bool canonical_cicids_labels = true;  // applies only when layout detected
};

Dataset load_csv(std::istream& in, const std::string& source_name, const LoadOptions& opts = {});
Dataset load_csv_file(const std::string& path, const LoadOptions& opts = {});

/// Numeric cell parser shared by every CSV ingest path: accepts decimal
/// numbers plus the textual Infinity/NaN markers.
bool parse_feature_cell(std::string_view cell, double& out);

/// Appends `extra` onto `base`. Headers must agree column-for-column; the
/// fine label tables are merged by name.
void append_dataset(Dataset& base, const Dataset& extra);

struct CleanStats {
    size_t rows_before = 0;
    size_t rows_removed = 0;
    size_t rows_after = 0;
};

/// Removes rows carrying Infinity/NaN markers. On CICIDS-shaped data only
/// the "Flow Packets/s" column is consulted; otherwise any feature column
/// triggers removal.
CleanStats clean(Dataset& data);

struct DropStats {
    std::vector<std::string> dropped;
};

/// Removes the named feature columns.
DropStats drop_features(Dataset& data, const std::vector<std::string>& names);

/// Removes every feature whose value is identical on all rows. Returns the
/// dropped names in schema order.
DropStats drop_constant_features(Dataset& data);

/// Attaches a label view (relabeling is a view change; fine labels stay).
void relabel(Dataset& data, LabelView view);

// --- splitting ----------------------------------------------------------

struct LabelQuota {
    std::string label;
    size_t train_count = 0;
    size_t test_count = 0;
};

struct SplitSpec {
    std::vector<LabelQuota> quotas;
    // Labels without a quota are left out of both halves.
    static SplitSpec cicids2017();
};

struct SplitShortfall {
    std::string label;
    size_t wanted_train = 0;
    size_t got_train = 0;
    size_t wanted_test = 0;
    size_t got_test = 0;
};

struct SplitResult {
    Dataset train;
    Dataset test;
    std::vector<SplitShortfall> shortfalls;
};

/// Per-label split. Train takes the first `train_count` rows of each label
/// in dataset order; test draws `test_count` rows from the remainder by a
/// seeded sample without replacement. Both halves preserve original row
/// order. Shortfalls are reported, not fatal.
SplitResult split(const Dataset& data, const SplitSpec& spec, uint64_t seed);

// --- normalization ------------------------------------------------------

struct NormalizationStats {
    std::vector<std::string> feature_names;
    std::vector<double> min;
    std::vector<double> max;

    void save(std::ostream& out) const;
    static NormalizationStats load(std::istream& in);
};

/// Column-wise min/max over finite values only.
NormalizationStats fit_normalizer(const Dataset& data);

/// Rescales every numeric cell to [0,1]: (x - min) / (max - min), with a
/// degenerate column (max == min) pinned to 0. Out-of-range values clamp;
/// +inf maps to 1, -inf and NaN to 0.
void apply_normalizer(Dataset& data, const NormalizationStats& stats);

double normalize_value(double x, double min, double max);

// --- persistence --------------------------------------------------------

void write_csv(const Dataset& data, std::ostream& out);
void write_csv_file(const Dataset& data, const std::string& path);
void write_provenance(const Dataset& data, const std::string& path);

}  // namespace hids
