#include "hids/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "hids/csv.hpp"

namespace hids {

bool parse_feature_cell(std::string_view cell, double& out) {
    std::string_view s = trim(cell);
    if (s == "Infinity" || s == "inf" || s == "+Infinity") {
        out = std::numeric_limits<double>::infinity();
        return true;
    }
    if (s == "-Infinity" || s == "-inf") {
        out = -std::numeric_limits<double>::infinity();
        return true;
    }
    if (s == "NaN" || s == "nan") {
        out = std::numeric_limits<double>::quiet_NaN();
        return true;
    }
    if (s.empty()) return false;
    try {
        out = parse_double(s);
    } catch (const InputError&) {
        return false;
    }
    return true;
}

namespace {

bool header_is_cicids(const std::vector<std::string>& names) {
    return std::any_of(names.begin(), names.end(),
                       [](const std::string& n) { return n == kCicidsMarkerFeature; });
}

}  // namespace

Dataset load_csv(std::istream& in, const std::string& source_name, const LoadOptions& opts) {
    CsvReader reader(in);
    std::vector<std::string> fields;
    size_t line = 0;
    if (!reader.next(fields, line))
        throw InputError(source_name + ": empty file");

    std::vector<std::string> header;
    header.reserve(fields.size());
    for (const auto& f : fields) header.emplace_back(trim(f));

    size_t label_col;
    if (opts.label_column.empty()) {
        if (header.empty()) throw InputError(source_name + ": empty header");
        label_col = header.size() - 1;
    } else {
        auto it = std::find(header.begin(), header.end(), opts.label_column);
        if (it == header.end())
            throw InputError(source_name + ": label column '" + opts.label_column + "' not found");
        label_col = static_cast<size_t>(it - header.begin());
    }

    DatasetSchema schema;
    schema.label_column = header[label_col];
    for (size_t i = 0; i < header.size(); ++i) {
        if (i == label_col) continue;
        schema.feature_names.push_back(header[i]);
        schema.feature_kinds.push_back(FeatureKind::numeric);
    }
    schema.cicids_layout = opts.force_cicids_layout || header_is_cicids(schema.feature_names);

    Dataset data(std::move(schema));
    bool canonical = data.schema().cicids_layout && opts.canonical_cicids_labels;

    std::unordered_map<std::string, int32_t> label_index;
    std::vector<double> row(data.width());
    while (reader.next(fields, line)) {
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;
        if (fields.size() != header.size())
            throw InputError(source_name + ":" + std::to_string(line) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        size_t out = 0;
        for (size_t i = 0; i < fields.size(); ++i) {
            if (i == label_col) continue;
            double v;
            if (!parse_feature_cell(fields[i], v))
                throw InputError(source_name + ":" + std::to_string(line) + ": column '" +
                                 data.schema().feature_names[out] + "': cannot parse '" +
                                 std::string(trim(fields[i])) + "' as a number");
            row[out++] = v;
        }
        std::string label(trim(fields[label_col]));
        if (canonical) label = canonical_fine_label(label);
        if (label.empty())
            throw InputError(source_name + ":" + std::to_string(line) + ": empty label");
        auto [it, inserted] = label_index.try_emplace(label, 0);
        if (inserted) {
            it->second = static_cast<int32_t>(data.mutable_schema().fine_labels.size());
            data.mutable_schema().fine_labels.push_back(label);
            // Keep the view in step with the growing label table.
        }
        data.raw_fine_labels().push_back(it->second);
        data.raw_values().insert(data.raw_values().end(), row.begin(), row.end());
    }
    data.set_view(LabelView::fine(data.schema().fine_labels));
    data.note("load " + source_name + " rows=" + std::to_string(data.size()));
    return data;
}

Dataset load_csv_file(const std::string& path, const LoadOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    return load_csv(in, path, opts);
}

void append_dataset(Dataset& base, const Dataset& extra) {
    if (base.schema().feature_names != extra.schema().feature_names)
        throw InputError("append: feature columns differ");
    std::vector<int32_t> remap(extra.schema().fine_labels.size());
    for (size_t i = 0; i < extra.schema().fine_labels.size(); ++i) {
        const std::string& name = extra.schema().fine_labels[i];
        auto idx = base.schema().label_index(name);
        if (!idx) {
            idx = static_cast<int32_t>(base.mutable_schema().fine_labels.size());
            base.mutable_schema().fine_labels.push_back(name);
        }
        remap[i] = *idx;
    }
    base.raw_values().insert(base.raw_values().end(), extra.raw_values().begin(),
                             extra.raw_values().end());
    for (size_t i = 0; i < extra.size(); ++i)
        base.raw_fine_labels().push_back(remap[static_cast<size_t>(extra.fine_label(i))]);
    base.set_view(LabelView::fine(base.schema().fine_labels));
    base.note("append rows=" + std::to_string(extra.size()));
}

namespace {

// Compacts rows in place, keeping those `keep` marks true.
size_t filter_rows(Dataset& data, const std::vector<char>& keep) {
    const size_t w = data.width();
    auto& values = data.raw_values();
    auto& labels = data.raw_fine_labels();
    size_t out = 0;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (!keep[i]) continue;
        if (out != i) {
            std::copy_n(values.begin() + static_cast<ptrdiff_t>(i * w), w,
                        values.begin() + static_cast<ptrdiff_t>(out * w));
            labels[out] = labels[i];
        }
        ++out;
    }
    size_t removed = labels.size() - out;
    values.resize(out * w);
    labels.resize(out);
    return removed;
}

}  // namespace

CleanStats clean(Dataset& data) {
    CleanStats stats;
    stats.rows_before = data.size();
    std::vector<char> keep(data.size(), 1);
    if (data.schema().cicids_layout) {
        auto col = data.schema().feature_index(std::string(kCicidsMarkerFeature));
        if (!col) throw InputError("clean: marker column missing from CICIDS-shaped schema");
        for (size_t i = 0; i < data.size(); ++i)
            if (!std::isfinite(data.value(i, *col))) keep[i] = 0;
    } else {
        const size_t w = data.width();
        for (size_t i = 0; i < data.size(); ++i) {
            auto row = data.row(i);
            for (size_t j = 0; j < w; ++j) {
                if (!std::isfinite(row[j])) {
                    keep[i] = 0;
                    break;
                }
            }
        }
    }
    stats.rows_removed = filter_rows(data, keep);
    stats.rows_after = data.size();
    data.note("clean removed=" + std::to_string(stats.rows_removed) +
              " kept=" + std::to_string(stats.rows_after));
    return stats;
}

DropStats drop_features(Dataset& data, const std::vector<std::string>& names) {
    DropStats stats;
    if (names.empty()) return stats;
    std::vector<char> drop(data.width(), 0);
    for (const auto& name : names) {
        auto idx = data.schema().feature_index(name);
        if (!idx) throw InputError("drop: feature '" + name + "' not in schema");
        if (drop[*idx]) throw InputError("drop: feature '" + name + "' listed twice");
        drop[*idx] = 1;
    }
    const size_t w = data.width();
    size_t new_w = w - names.size();
    auto& values = data.raw_values();
    size_t out = 0;
    for (size_t i = 0; i < data.size(); ++i) {
        for (size_t j = 0; j < w; ++j) {
            if (drop[j]) continue;
            values[out++] = values[i * w + j];
        }
    }
    values.resize(out);

    auto& schema = data.mutable_schema();
    std::vector<std::string> kept_names;
    std::vector<FeatureKind> kept_kinds;
    for (size_t j = 0; j < w; ++j) {
        if (drop[j]) {
            stats.dropped.push_back(schema.feature_names[j]);
            continue;
        }
        kept_names.push_back(schema.feature_names[j]);
        kept_kinds.push_back(schema.feature_kinds[j]);
    }
    schema.feature_names = std::move(kept_names);
    schema.feature_kinds = std::move(kept_kinds);
    if (schema.width() != new_w) throw InternalError("drop: width bookkeeping failed");

    std::string note = "drop";
    for (const auto& name : stats.dropped) note += " '" + name + "'";
    data.note(note);
    return stats;
}

DropStats drop_constant_features(Dataset& data) {
    std::vector<std::string> constant;
    if (data.size() > 0) {
        const size_t w = data.width();
        for (size_t j = 0; j < w; ++j) {
            double first = data.value(0, j);
            bool all_same = true;
            bool first_nan = std::isnan(first);
            for (size_t i = 1; i < data.size(); ++i) {
                double v = data.value(i, j);
                if (first_nan ? !std::isnan(v) : v != first) {
                    all_same = false;
                    break;
                }
            }
            if (all_same) constant.push_back(data.schema().feature_names[j]);
        }
    }
    return drop_features(data, constant);
}

void relabel(Dataset& data, LabelView view) {
    data.set_view(std::move(view));
    const char* kind = data.view().kind == LabelView::Kind::binary     ? "binary"
                       : data.view().kind == LabelView::Kind::category ? "category"
                                                                       : "fine";
    data.note(std::string("relabel view=") + kind);
}

SplitSpec SplitSpec::cicids2017() {
    SplitSpec spec;
    spec.quotas = {
        {"BENIGN", 20000, 20000},
        {"DDoS", 2700, 3300},
        {"DoS slowloris", 1350, 1650},
        {"DoS Slowhttptest", 2171, 1169},
        {"DoS Hulk", 4500, 5500},
        {"DoS GoldenEye", 1300, 700},
        {"Heartbleed", 5, 5},
        {"PortScan", 3808, 4192},
        {"Bot", 936, 624},
        {"FTP-Patator", 900, 1100},
        {"SSH-Patator", 900, 1100},
        {"Web Attack-Brute Force", 910, 490},
        {"Web Attack-XSS", 480, 160},
        {"Web Attack-Sql Injection", 16, 4},
        {"Infiltration", 24, 6},
    };
    return spec;
}

SplitResult split(const Dataset& data, const SplitSpec& spec, uint64_t seed) {
    SplitResult result;
    result.train = Dataset(data.schema());
    result.test = Dataset(data.schema());

    std::unordered_map<std::string, size_t> quota_of;
    for (size_t q = 0; q < spec.quotas.size(); ++q) {
        if (!quota_of.try_emplace(spec.quotas[q].label, q).second)
            throw InputError("split: label '" + spec.quotas[q].label + "' quoted twice");
    }

    // Row indices per quota, in dataset order.
    std::vector<std::vector<size_t>> rows_of(spec.quotas.size());
    for (size_t i = 0; i < data.size(); ++i) {
        auto it = quota_of.find(data.fine_label_name(i));
        if (it != quota_of.end()) rows_of[it->second].push_back(i);
    }

    std::vector<char> to_train(data.size(), 0);
    std::vector<char> to_test(data.size(), 0);
    for (size_t q = 0; q < spec.quotas.size(); ++q) {
        const LabelQuota& quota = spec.quotas[q];
        const auto& rows = rows_of[q];
        size_t n_train = std::min(quota.train_count, rows.size());
        for (size_t k = 0; k < n_train; ++k) to_train[rows[k]] = 1;

        std::vector<size_t> rest(rows.begin() + static_cast<ptrdiff_t>(n_train), rows.end());
        size_t n_test = std::min(quota.test_count, rest.size());
        if (n_test > 0 && n_test < rest.size()) {
            // Partial Fisher-Yates: the first n_test slots become the sample.
            SplitMix64 rng(derive_seed(seed, fnv1a64(quota.label)));
            for (size_t k = 0; k < n_test; ++k) {
                size_t j = k + static_cast<size_t>(rng.below(rest.size() - k));
                std::swap(rest[k], rest[j]);
            }
        }
        for (size_t k = 0; k < n_test; ++k) to_test[rest[k]] = 1;

        if (n_train < quota.train_count || n_test < quota.test_count) {
            result.shortfalls.push_back({quota.label, quota.train_count, n_train,
                                         quota.test_count, n_test});
        }
    }

    size_t n_train_total = 0;
    size_t n_test_total = 0;
    for (size_t i = 0; i < data.size(); ++i) {
        if (to_train[i]) {
            result.train.append_row(data.row(i), data.fine_label(i));
            ++n_train_total;
        } else if (to_test[i]) {
            result.test.append_row(data.row(i), data.fine_label(i));
            ++n_test_total;
        }
    }

    result.train.set_provenance(data.provenance());
    result.test.set_provenance(data.provenance());
    result.train.note("split half=train rows=" + std::to_string(n_train_total) +
                      " seed=" + std::to_string(seed));
    result.test.note("split half=test rows=" + std::to_string(n_test_total) +
                     " seed=" + std::to_string(seed));
    result.train.set_view(data.view());
    result.test.set_view(data.view());
    return result;
}

NormalizationStats fit_normalizer(const Dataset& data) {
    NormalizationStats stats;
    stats.feature_names = data.schema().feature_names;
    const size_t w = data.width();
    stats.min.assign(w, std::numeric_limits<double>::infinity());
    stats.max.assign(w, -std::numeric_limits<double>::infinity());
    for (size_t i = 0; i < data.size(); ++i) {
        auto row = data.row(i);
        for (size_t j = 0; j < w; ++j) {
            double v = row[j];
            if (!std::isfinite(v)) continue;
            stats.min[j] = std::min(stats.min[j], v);
            stats.max[j] = std::max(stats.max[j], v);
        }
    }
    // A column with no finite values normalizes everything to 0.
    for (size_t j = 0; j < w; ++j) {
        if (stats.min[j] > stats.max[j]) {
            stats.min[j] = 0.0;
            stats.max[j] = 0.0;
        }
    }
    return stats;
}

double normalize_value(double x, double min, double max) {
    if (std::isnan(x)) return 0.0;
    if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
    if (max == min) return 0.0;
    double y = (x - min) / (max - min);
    return std::clamp(y, 0.0, 1.0);
}

void apply_normalizer(Dataset& data, const NormalizationStats& stats) {
    if (stats.feature_names != data.schema().feature_names)
        throw InputError("normalize: stats were fit on different feature columns");
    const size_t w = data.width();
    auto& values = data.raw_values();
    for (size_t i = 0; i < data.size(); ++i)
        for (size_t j = 0; j < w; ++j)
            values[i * w + j] = normalize_value(values[i * w + j], stats.min[j], stats.max[j]);
    data.note("normalize min-max");
}

void NormalizationStats::save(std::ostream& out) const {
    out << "normstats v1 " << feature_names.size() << "\n";
    for (size_t j = 0; j < feature_names.size(); ++j) {
        out << csv_escape(feature_names[j]) << "," << format_double(min[j]) << ","
            << format_double(max[j]) << "\n";
    }
}

NormalizationStats NormalizationStats::load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InputError("normstats: empty stream");
    std::istringstream head(line);
    std::string tag, version;
    size_t count = 0;
    head >> tag >> version >> count;
    if (tag != "normstats" || version != "v1")
        throw InputError("normstats: unrecognized header '" + line + "'");
    NormalizationStats stats;
    stats.feature_names.reserve(count);
    stats.min.reserve(count);
    stats.max.reserve(count);
    CsvReader reader(in);
    std::vector<std::string> fields;
    size_t lineno = 0;
    while (stats.feature_names.size() < count) {
        if (!reader.next(fields, lineno)) throw InputError("normstats: truncated");
        if (fields.size() != 3) throw InputError("normstats: malformed row");
        stats.feature_names.push_back(fields[0]);
        stats.min.push_back(parse_double(fields[1]));
        stats.max.push_back(parse_double(fields[2]));
    }
    return stats;
}

void write_csv(const Dataset& data, std::ostream& out) {
    std::vector<std::string> row = data.schema().feature_names;
    row.push_back(data.schema().label_column.empty() ? "Label" : data.schema().label_column);
    write_csv_row(out, row);
    const size_t w = data.width();
    for (size_t i = 0; i < data.size(); ++i) {
        row.clear();
        auto vals = data.row(i);
        for (size_t j = 0; j < w; ++j) row.push_back(format_double(vals[j]));
        row.push_back(data.fine_label_name(i));
        write_csv_row(out, row);
    }
}

void write_csv_file(const Dataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    write_csv(data, out);
    if (!out) throw InputError("write failed for '" + path + "'");
}

void write_provenance(const Dataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    for (const auto& line : data.provenance()) out << line << "\n";
}

}  // namespace hids
