#include "hids/metrics.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "hids/common.hpp"

namespace hids {

uint64_t ConfusionMatrix::total() const {
    uint64_t t = 0;
    for (uint64_t c : counts) t += c;
    return t;
}

uint64_t ConfusionMatrix::trace() const {
    uint64_t t = 0;
    for (size_t c = 0; c < vocabulary.size(); ++c) t += at(c, c);
    return t;
}

uint64_t ConfusionMatrix::row_total(size_t actual) const {
    uint64_t t = 0;
    for (size_t c = 0; c < vocabulary.size(); ++c) t += at(actual, c);
    return t;
}

std::optional<size_t> ConfusionMatrix::benign_index() const {
    for (size_t c = 0; c < vocabulary.size(); ++c)
        if (vocabulary[c] == "BENIGN") return c;
    return std::nullopt;
}

ConfusionMatrix confusion(std::span<const int32_t> predictions, std::span<const int32_t> truths,
                          std::vector<std::string> vocabulary) {
    if (predictions.size() != truths.size())
        throw InputError("confusion: prediction and truth lengths differ");
    ConfusionMatrix cm;
    cm.vocabulary = std::move(vocabulary);
    const size_t k = cm.vocabulary.size();
    cm.counts.assign(k * k, 0);
    for (size_t i = 0; i < predictions.size(); ++i) {
        int32_t a = truths[i];
        int32_t p = predictions[i];
        if (a < 0 || static_cast<size_t>(a) >= k || p < 0 || static_cast<size_t>(p) >= k)
            throw InputError("confusion: label outside the vocabulary at row " +
                             std::to_string(i));
        ++cm.at(static_cast<size_t>(a), static_cast<size_t>(p));
    }
    return cm;
}

std::optional<double> dr_per_class(const ConfusionMatrix& cm, size_t class_index) {
    uint64_t actual = cm.row_total(class_index);
    if (actual == 0) return std::nullopt;
    return static_cast<double>(cm.at(class_index, class_index)) / static_cast<double>(actual);
}

double tnr(const ConfusionMatrix& cm) {
    auto benign = cm.benign_index();
    if (!benign) throw InputError("tnr: vocabulary has no BENIGN class");
    uint64_t actual = cm.row_total(*benign);
    if (actual == 0) throw InputError("tnr: no actual BENIGN records");
    return static_cast<double>(cm.at(*benign, *benign)) / static_cast<double>(actual);
}

double far(const ConfusionMatrix& cm) { return 1.0 - tnr(cm); }

double dr_overall(const ConfusionMatrix& cm) {
    auto benign = cm.benign_index();
    uint64_t benign_actual = benign ? cm.row_total(*benign) : 0;
    uint64_t benign_tp = benign ? cm.at(*benign, *benign) : 0;
    uint64_t attack_actual = cm.total() - benign_actual;
    if (attack_actual == 0) throw InputError("dr_overall: no actual attack records");
    uint64_t attack_tp = cm.trace() - benign_tp;
    return static_cast<double>(attack_tp) / static_cast<double>(attack_actual);
}

double accuracy(const ConfusionMatrix& cm) {
    uint64_t total = cm.total();
    if (total == 0) throw InputError("accuracy: empty matrix");
    return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

MetricsReport build_report(const ConfusionMatrix& cm) {
    MetricsReport report;
    report.vocabulary = cm.vocabulary;
    report.counts = cm.counts;
    report.accuracy_value = accuracy(cm);
    auto benign = cm.benign_index();
    if (benign && cm.row_total(*benign) > 0) {
        report.tnr_value = tnr(cm);
        report.far_value = far(cm);
    }
    uint64_t benign_actual = benign ? cm.row_total(*benign) : 0;
    if (cm.total() > benign_actual) report.dr_overall_value = dr_overall(cm);
    for (size_t c = 0; c < cm.vocabulary.size(); ++c) {
        if (benign && c == *benign) continue;
        auto dr = dr_per_class(cm, c);
        if (dr) report.per_attack_dr.push_back({cm.vocabulary[c], *dr});
    }
    return report;
}

void emit_kv(const MetricsReport& report, std::ostream& out) {
    out << "metrics v1\n";
    out << "classes " << report.vocabulary.size() << "\n";
    for (const auto& name : report.vocabulary) out << name << "\n";
    out << "counts";
    for (uint64_t c : report.counts) out << " " << c;
    out << "\n";
    if (report.tnr_value) out << "tnr " << format_double(*report.tnr_value) << "\n";
    if (report.far_value) out << "far " << format_double(*report.far_value) << "\n";
    if (report.dr_overall_value)
        out << "dr_overall " << format_double(*report.dr_overall_value) << "\n";
    out << "accuracy " << format_double(report.accuracy_value) << "\n";
    for (const auto& [name, rate] : report.per_attack_dr)
        out << "dr " << format_double(rate) << " " << name << "\n";
    if (report.train_seconds) out << "train_seconds " << format_double(*report.train_seconds) << "\n";
    if (report.test_seconds) out << "test_seconds " << format_double(*report.test_seconds) << "\n";
    out << "end metrics\n";
}

MetricsReport parse_kv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "metrics v1")
        throw InputError("metrics: unrecognized header '" + line + "'");
    MetricsReport report;
    size_t n_classes = 0;
    {
        if (!std::getline(in, line)) throw InputError("metrics: truncated");
        std::istringstream ls(line);
        std::string tag;
        ls >> tag >> n_classes;
        if (tag != "classes" || ls.fail()) throw InputError("metrics: bad classes line");
    }
    for (size_t c = 0; c < n_classes; ++c) {
        if (!std::getline(in, line)) throw InputError("metrics: truncated class list");
        report.vocabulary.push_back(line);
    }
    {
        if (!std::getline(in, line)) throw InputError("metrics: truncated");
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag != "counts") throw InputError("metrics: expected counts line");
        uint64_t c = 0;
        while (ls >> c) report.counts.push_back(c);
        if (report.counts.size() != n_classes * n_classes)
            throw InputError("metrics: counts size mismatch");
    }
    while (std::getline(in, line)) {
        if (line == "end metrics") return report;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "dr") {
            std::string rate;
            ls >> rate;
            std::string name;
            std::getline(ls, name);
            if (!name.empty() && name.front() == ' ') name.erase(0, 1);
            if (rate.empty() || name.empty()) throw InputError("metrics: bad dr line '" + line + "'");
            report.per_attack_dr.push_back({name, parse_double(rate)});
            continue;
        }
        std::string value;
        ls >> value;
        if (ls.fail()) throw InputError("metrics: bad line '" + line + "'");
        double v = parse_double(value);
        if (key == "tnr")
            report.tnr_value = v;
        else if (key == "far")
            report.far_value = v;
        else if (key == "dr_overall")
            report.dr_overall_value = v;
        else if (key == "accuracy")
            report.accuracy_value = v;
        else if (key == "train_seconds")
            report.train_seconds = v;
        else if (key == "test_seconds")
            report.test_seconds = v;
        else
            throw InputError("metrics: unknown key '" + key + "'");
    }
    throw InputError("metrics: missing end marker");
}

void emit_table(const MetricsReport& report, std::ostream& out) {
    std::vector<std::pair<std::string, std::string>> rows;
    if (report.tnr_value) rows.push_back({"TNR (BENIGN)", format_percent(*report.tnr_value) + "%"});
    for (const auto& [name, rate] : report.per_attack_dr)
        rows.push_back({"DR (" + name + ")", format_percent(rate) + "%"});
    if (report.far_value) rows.push_back({"FAR", format_percent(*report.far_value) + "%"});
    if (report.dr_overall_value)
        rows.push_back({"DR (Overall)", format_percent(*report.dr_overall_value) + "%"});
    rows.push_back({"Accuracy", format_percent(report.accuracy_value) + "%"});
    if (report.train_seconds)
        rows.push_back({"Training time (s)", format_double(*report.train_seconds)});
    if (report.test_seconds)
        rows.push_back({"Test time (s)", format_double(*report.test_seconds)});

    size_t left = 0, right = 0;
    for (const auto& [k, v] : rows) {
        left = std::max(left, k.size());
        right = std::max(right, v.size());
    }
    for (const auto& [k, v] : rows) {
        out << k << std::string(left - k.size() + 2, ' ') << std::string(right - v.size(), ' ')
            << v << "\n";
    }
}

}  // namespace hids
