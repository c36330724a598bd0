#include "hids/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "hids/common.hpp"

namespace hids {

std::optional<size_t> DatasetSchema::feature_index(std::string_view name) const {
    for (size_t i = 0; i < feature_names.size(); ++i)
        if (feature_names[i] == name) return i;
    return std::nullopt;
}

std::optional<int32_t> DatasetSchema::label_index(std::string_view name) const {
    for (size_t i = 0; i < fine_labels.size(); ++i)
        if (fine_labels[i] == name) return static_cast<int32_t>(i);
    return std::nullopt;
}

void DatasetSchema::validate() const {
    if (feature_names.size() != feature_kinds.size())
        throw InputError("schema: feature_names and feature_kinds differ in length");
    std::unordered_set<std::string_view> seen;
    for (const auto& name : feature_names) {
        if (name.empty()) throw InputError("schema: empty feature name");
        if (!seen.insert(name).second)
            throw InputError("schema: duplicate feature name '" + name + "'");
        if (name == label_column)
            throw InputError("schema: label column '" + name + "' listed as a feature");
    }
    std::unordered_set<std::string_view> labels;
    for (const auto& lbl : fine_labels) {
        if (lbl.empty()) throw InputError("schema: empty label name");
        if (!labels.insert(lbl).second)
            throw InputError("schema: duplicate label name '" + lbl + "'");
    }
}

LabelView LabelView::binary(const std::vector<std::string>& fine_labels) {
    LabelView v;
    v.kind = Kind::binary;
    v.vocabulary = {"BENIGN", "Attack"};
    v.mapping.reserve(fine_labels.size());
    for (const auto& lbl : fine_labels) v.mapping.push_back(lbl == "BENIGN" ? 0 : 1);
    return v;
}

namespace {

// Category each CICIDS2017 fine label folds into, or empty when unknown.
std::string_view category_of(std::string_view fine) {
    if (fine == "BENIGN") return "BENIGN";
    if (fine == "DDoS" || fine == "Heartbleed" || fine.starts_with("DoS ")) return "DoS";
    if (fine == "PortScan") return "PortScan";
    if (fine == "Bot") return "Bot";
    if (fine == "FTP-Patator" || fine == "SSH-Patator") return "Brute-Force";
    if (fine.starts_with("Web Attack")) return "Web Attack";
    if (fine == "Infiltration") return "Infiltration";
    return {};
}

const std::vector<std::string>& category_vocab() {
    static const std::vector<std::string> vocab = {
        "BENIGN", "DoS", "PortScan", "Bot", "Brute-Force", "Web Attack", "Infiltration",
    };
    return vocab;
}

}  // namespace

LabelView LabelView::category(const std::vector<std::string>& fine_labels) {
    LabelView v;
    v.kind = Kind::category;
    v.vocabulary = category_vocab();
    v.mapping.reserve(fine_labels.size());
    for (const auto& lbl : fine_labels) {
        std::string_view cat = category_of(lbl);
        if (cat.empty())
            throw InputError("label '" + lbl + "' has no category grouping");
        auto it = std::find(v.vocabulary.begin(), v.vocabulary.end(), cat);
        v.mapping.push_back(static_cast<int32_t>(it - v.vocabulary.begin()));
    }
    return v;
}

LabelView LabelView::fine(const std::vector<std::string>& fine_labels) {
    LabelView v;
    v.kind = Kind::fine;
    v.vocabulary = fine_labels;
    v.mapping.resize(fine_labels.size());
    for (size_t i = 0; i < fine_labels.size(); ++i) v.mapping[i] = static_cast<int32_t>(i);
    return v;
}

bool LabelView::category_mappable(const std::vector<std::string>& fine_labels) {
    return std::all_of(fine_labels.begin(), fine_labels.end(),
                       [](const std::string& lbl) { return !category_of(lbl).empty(); });
}

Dataset::Dataset(DatasetSchema schema) : schema_(std::move(schema)) {
    schema_.validate();
    view_ = LabelView::fine(schema_.fine_labels);
}

void Dataset::reserve(size_t rows) {
    values_.reserve(rows * width());
    fine_labels_.reserve(rows);
}

void Dataset::append(const FlowRecord& record) {
    append_row(record.values, record.fine_label);
}

void Dataset::append_row(std::span<const double> values, int32_t fine_label) {
    if (values.size() != width())
        throw InputError("row width " + std::to_string(values.size()) + " does not match schema width " +
                         std::to_string(width()));
    if (fine_label < 0 || static_cast<size_t>(fine_label) >= schema_.fine_labels.size())
        throw InputError("fine label index " + std::to_string(fine_label) + " out of range");
    values_.insert(values_.end(), values.begin(), values.end());
    fine_labels_.push_back(fine_label);
}

void Dataset::set_view(LabelView v) {
    if (v.mapping.size() != schema_.fine_labels.size())
        throw InputError("label view mapping does not cover the fine label table");
    view_ = std::move(v);
}

const std::vector<std::string>& cicids2017_fine_labels() {
    static const std::vector<std::string> labels = {
        "BENIGN",
        "DDoS",
        "DoS slowloris",
        "DoS Slowhttptest",
        "DoS Hulk",
        "DoS GoldenEye",
        "Heartbleed",
        "PortScan",
        "Bot",
        "FTP-Patator",
        "SSH-Patator",
        "Web Attack-Brute Force",
        "Web Attack-XSS",
        "Web Attack-Sql Injection",
        "Infiltration",
    };
    return labels;
}

std::string canonical_fine_label(std::string_view raw) {
    std::string s(trim(raw));
    // The published CSVs encode the Web Attack dash as Windows-1252 0x96
    // (en dash), which survives as either the single byte or the UTF-8
    // sequence 0xE2 0x80 0x93 depending on the exporter.
    if (s.starts_with("Web Attack")) {
        std::string tail = s.substr(10);
        size_t pos = 0;
        while (pos < tail.size()) {
            unsigned char c = static_cast<unsigned char>(tail[pos]);
            if (c == ' ' || c == 0x96 || c == '-') {
                ++pos;
            } else if (c == 0xE2 && pos + 2 < tail.size() &&
                       static_cast<unsigned char>(tail[pos + 1]) == 0x80 &&
                       static_cast<unsigned char>(tail[pos + 2]) == 0x93) {
                pos += 3;
            } else {
                break;
            }
        }
        std::string rest = tail.substr(pos);
        if (rest == "Brute Force" || rest == "XSS") return "Web Attack-" + rest;
        if (rest == "Sql Injection" || rest == "SQL Injection") return "Web Attack-Sql Injection";
        return s;
    }
    if (s.size() == 6) {
        std::string upper = s;
        for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (upper == "BENIGN") return "BENIGN";
    }
    return s;
}

std::vector<std::string> cicids2017_drop_list(const DatasetSchema& schema) {
    // Columns constant across the corpus. Two header spellings circulate
    // for the Avg Bulk Rate pair; resolve whichever the schema carries.
    static const std::vector<std::vector<std::string>> wanted = {
        {"Bwd PSH Flags"},
        {"Bwd URG Flags"},
        {"Fwd Avg Bytes/Bulk"},
        {"Fwd Avg Packets/Bulk"},
        {"Fwd Avg Bulk Rate", "Fwd Avg Bulk/Rate"},
        {"Bwd Avg Bytes/Bulk"},
        {"Bwd Avg Packets/Bulk"},
        {"Bwd Avg Bulk Rate", "Bwd Avg Bulk/Rate"},
    };
    std::vector<std::string> resolved;
    resolved.reserve(wanted.size());
    for (const auto& spellings : wanted) {
        for (const auto& name : spellings) {
            if (schema.feature_index(name)) {
                resolved.push_back(name);
                break;
            }
        }
    }
    return resolved;
}

}  // namespace hids
