#include "hids/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "hids/common.hpp"

namespace hids {

double CodeTable::encode(size_t index) const {
    if (index >= labels.size()) throw InputError("encode: label index out of range");
    if (labels.size() <= 1) return 0.0;
    return static_cast<double>(index) / static_cast<double>(labels.size() - 1);
}

size_t CodeTable::index_of(std::string_view label) const {
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) return i;
    throw InputError("encode: label '" + std::string(label) + "' not in code table");
}

size_t CodeTable::decode(double code) const {
    if (labels.empty()) throw InputError("decode: empty code table");
    if (labels.size() == 1) return 0;
    double scaled = code * static_cast<double>(labels.size() - 1);
    long idx = std::lround(scaled);
    idx = std::clamp(idx, 0L, static_cast<long>(labels.size() - 1));
    return static_cast<size_t>(idx);
}

double encode_prediction(std::string_view label, const CodeTable& table) {
    return table.encode(table.index_of(label));
}

std::vector<double> augment(std::span<const double> record, std::string_view out1,
                            std::string_view out2, const CodeTable& code1,
                            const CodeTable& code2) {
    std::vector<double> row(record.begin(), record.end());
    row.push_back(encode_prediction(out1, code1));
    row.push_back(encode_prediction(out2, code2));
    return row;
}

namespace {

template <typename F>
auto run_stage(const char* stage, F&& fn) {
    try {
        return fn();
    } catch (const InputError& e) {
        throw InputError(std::string(stage) + ": " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(stage) + ": " + e.what());
    }
}

Dataset normalized_copy(const Dataset& data, const NormalizationStats& stats) {
    Dataset out = data;
    apply_normalizer(out, stats);
    return out;
}

}  // namespace

HierarchicalModel train_hierarchy(const Dataset& train, const StackParams& params) {
    if (train.empty()) throw InputError("train: empty dataset");
    HierarchicalModel model;
    model.base_width = train.width();
    model.master_seed = params.seed;
    model.fine_targets = params.fine_targets;
    model.fine_classes = train.schema().fine_labels;

    model.stats = fit_normalizer(train);
    Dataset work = normalized_copy(train, model.stats);

    bool category_ok = LabelView::category_mappable(model.fine_classes);
    model.view1 = LabelView::binary(model.fine_classes);
    model.view2 = category_ok ? LabelView::category(model.fine_classes)
                              : LabelView::fine(model.fine_classes);
    model.view3 = (params.fine_targets || !category_ok)
                      ? LabelView::fine(model.fine_classes)
                      : LabelView::category(model.fine_classes);

    RepTreeParams p1 = params.reptree;
    p1.seed = derive_seed(params.seed, 1);
    work.set_view(model.view1);
    model.model1 = run_stage("stage1", [&] { return train_rep_tree(work, p1); });

    RipperParams p2 = params.ripper;
    p2.seed = derive_seed(params.seed, 2);
    work.set_view(model.view2);
    model.model2 = run_stage("stage2", [&] { return train_ripper(work, p2); });

    model.code1.labels = model.model1.classes;
    model.code2.labels = model.model2.classes;

    DatasetSchema aug_schema = train.schema();
    aug_schema.feature_names.push_back("stage1_code");
    aug_schema.feature_kinds.push_back(FeatureKind::numeric);
    aug_schema.feature_names.push_back("stage2_code");
    aug_schema.feature_kinds.push_back(FeatureKind::numeric);
    Dataset augmented(aug_schema);
    augmented.reserve(work.size());
    std::vector<double> row;
    row.reserve(work.width() + 2);
    for (size_t i = 0; i < work.size(); ++i) {
        auto base = work.row(i);
        int32_t o1 = model.model1.predict(base);
        int32_t o2 = model.model2.predict(base);
        row.assign(base.begin(), base.end());
        row.push_back(model.code1.encode(static_cast<size_t>(o1)));
        row.push_back(model.code2.encode(static_cast<size_t>(o2)));
        augmented.append_row(row, work.fine_label(i));
    }
    augmented.set_view(model.view3);

    PaTreeParams p3 = params.forest;
    p3.seed = derive_seed(params.seed, 3);
    model.model3 = run_stage("stage3", [&] { return train_forest(augmented, p3); });
    return model;
}

StagedPrediction HierarchicalModel::predict_stages(std::span<const double> raw) const {
    if (raw.size() != base_width) throw InputError("predict: record width mismatch");
    std::vector<double> buf(base_width + 2);
    for (size_t j = 0; j < base_width; ++j)
        buf[j] = normalize_value(raw[j], stats.min[j], stats.max[j]);
    std::span<const double> base(buf.data(), base_width);
    StagedPrediction out;
    out.out1 = model1.predict(base);
    out.out2 = model2.predict(base);
    buf[base_width] = code1.encode(static_cast<size_t>(out.out1));
    buf[base_width + 1] = code2.encode(static_cast<size_t>(out.out2));
    out.out3 = model3.predict(buf);
    return out;
}

int32_t HierarchicalModel::predict(std::span<const double> raw) const {
    return predict_stages(raw).out3;
}

std::vector<StagedPrediction> predict_batch(const HierarchicalModel& model, const Dataset& data,
                                            size_t threads) {
    if (data.width() != model.base_width)
        throw InputError("predict: dataset width " + std::to_string(data.width()) +
                         " does not match model width " + std::to_string(model.base_width));
    const size_t n = data.size();
    std::vector<StagedPrediction> results(n);
    if (n == 0) return results;
    size_t hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    size_t n_workers = std::max<size_t>(1, std::min({threads == 0 ? hw : threads, hw * 4, n}));

    auto run_range = [&](size_t lo, size_t hi) {
        for (size_t i = lo; i < hi; ++i) results[i] = model.predict_stages(data.row(i));
    };
    if (n_workers == 1) {
        run_range(0, n);
        return results;
    }
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(n_workers);
    size_t chunk = (n + n_workers - 1) / n_workers;
    for (size_t w = 0; w < n_workers; ++w) {
        size_t lo = w * chunk;
        size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([&, w, lo, hi] {
            try {
                run_range(lo, hi);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

namespace {

void write_view(std::ostream& out, const char* name, const LabelView& view) {
    const char* kind = view.kind == LabelView::Kind::binary     ? "binary"
                       : view.kind == LabelView::Kind::category ? "category"
                                                                : "fine";
    out << name << " " << kind;
    for (int32_t m : view.mapping) out << " " << m;
    out << "\n";
    out << name << "_vocab " << view.vocabulary.size() << "\n";
    for (const auto& label : view.vocabulary) out << label << "\n";
}

LabelView read_view(std::istream& in, const std::string& name, size_t n_fine) {
    std::string line;
    if (!std::getline(in, line)) throw InputError("hierarchy: truncated view section");
    std::istringstream ls(line);
    std::string tag, kind;
    ls >> tag >> kind;
    if (tag != name) throw InputError("hierarchy: expected " + name + " line");
    LabelView view;
    if (kind == "binary")
        view.kind = LabelView::Kind::binary;
    else if (kind == "category")
        view.kind = LabelView::Kind::category;
    else if (kind == "fine")
        view.kind = LabelView::Kind::fine;
    else
        throw InputError("hierarchy: unknown view kind '" + kind + "'");
    int32_t m = 0;
    while (ls >> m) view.mapping.push_back(m);
    if (view.mapping.size() != n_fine)
        throw InputError("hierarchy: view mapping does not cover fine classes");
    if (!std::getline(in, line)) throw InputError("hierarchy: truncated view vocab");
    std::istringstream vs(line);
    std::string vtag;
    size_t n_vocab = 0;
    vs >> vtag >> n_vocab;
    if (vtag != name + "_vocab" || vs.fail())
        throw InputError("hierarchy: bad view vocab line '" + line + "'");
    for (size_t i = 0; i < n_vocab; ++i) {
        if (!std::getline(in, line)) throw InputError("hierarchy: truncated view vocab");
        view.vocabulary.push_back(line);
    }
    return view;
}

template <typename Model>
std::string serialize_component(const Model& m) {
    std::ostringstream out;
    m.save(out);
    return out.str();
}

void expect_line(std::istream& in, const std::string& want, const char* what) {
    std::string line;
    if (!std::getline(in, line) || line != want)
        throw InputError(std::string("hierarchy: expected '") + want + "' " + what);
}

}  // namespace

void HierarchicalModel::save(std::ostream& out) const {
    std::string s_stats;
    {
        std::ostringstream os;
        stats.save(os);
        s_stats = os.str();
    }
    std::string s1 = serialize_component(model1);
    std::string s2 = serialize_component(model2);
    std::string s3 = serialize_component(model3);

    out << "hierarchy v1\n";
    out << "base_width " << base_width << "\n";
    out << "master_seed " << master_seed << "\n";
    out << "targets " << (fine_targets ? "fine" : "category") << "\n";
    out << "fine_classes " << fine_classes.size() << "\n";
    for (const auto& name : fine_classes) out << name << "\n";
    write_view(out, "view1", view1);
    write_view(out, "view2", view2);
    write_view(out, "view3", view3);
    out << "manifest stats " << fnv1a64(s_stats) << " model1 " << fnv1a64(s1) << " model2 "
        << fnv1a64(s2) << " model3 " << fnv1a64(s3) << "\n";
    out << "begin stats\n" << s_stats << "end stats\n";
    out << "begin model1\n" << s1 << "end model1\n";
    out << "begin model2\n" << s2 << "end model2\n";
    out << "begin model3\n" << s3 << "end model3\n";
}

HierarchicalModel HierarchicalModel::load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "hierarchy v1")
        throw InputError("hierarchy: unrecognized header '" + line + "'");
    HierarchicalModel model;
    {
        if (!std::getline(in, line)) throw InputError("hierarchy: truncated");
        std::istringstream ls(line);
        std::string tag;
        ls >> tag >> model.base_width;
        if (tag != "base_width" || ls.fail()) throw InputError("hierarchy: bad base_width line");
    }
    {
        if (!std::getline(in, line)) throw InputError("hierarchy: truncated");
        std::istringstream ls(line);
        std::string tag;
        ls >> tag >> model.master_seed;
        if (tag != "master_seed" || ls.fail()) throw InputError("hierarchy: bad master_seed line");
    }
    {
        if (!std::getline(in, line)) throw InputError("hierarchy: truncated");
        std::istringstream ls(line);
        std::string tag, mode;
        ls >> tag >> mode;
        if (tag != "targets" || (mode != "fine" && mode != "category"))
            throw InputError("hierarchy: bad targets line");
        model.fine_targets = mode == "fine";
    }
    size_t n_fine = 0;
    {
        if (!std::getline(in, line)) throw InputError("hierarchy: truncated");
        std::istringstream ls(line);
        std::string tag;
        ls >> tag >> n_fine;
        if (tag != "fine_classes" || ls.fail())
            throw InputError("hierarchy: bad fine_classes line");
    }
    for (size_t i = 0; i < n_fine; ++i) {
        if (!std::getline(in, line)) throw InputError("hierarchy: truncated fine class list");
        model.fine_classes.push_back(line);
    }
    model.view1 = read_view(in, "view1", n_fine);
    model.view2 = read_view(in, "view2", n_fine);
    model.view3 = read_view(in, "view3", n_fine);

    uint64_t h_stats = 0, h1 = 0, h2 = 0, h3 = 0;
    {
        if (!std::getline(in, line)) throw InputError("hierarchy: truncated");
        std::istringstream ls(line);
        std::string tag, key;
        ls >> tag >> key >> h_stats >> key >> h1 >> key >> h2 >> key >> h3;
        if (tag != "manifest" || ls.fail()) throw InputError("hierarchy: bad manifest line");
    }

    expect_line(in, "begin stats", "section start");
    model.stats = NormalizationStats::load(in);
    expect_line(in, "end stats", "section end");
    expect_line(in, "begin model1", "section start");
    model.model1 = RepTreeModel::load(in);
    expect_line(in, "end model1", "section end");
    expect_line(in, "begin model2", "section start");
    model.model2 = RuleSet::load(in);
    expect_line(in, "end model2", "section end");
    expect_line(in, "begin model3", "section start");
    model.model3 = ForestPaModel::load(in);
    expect_line(in, "end model3", "section end");

    std::string r_stats;
    {
        std::ostringstream os;
        model.stats.save(os);
        r_stats = os.str();
    }
    if (fnv1a64(r_stats) != h_stats || fnv1a64(serialize_component(model.model1)) != h1 ||
        fnv1a64(serialize_component(model.model2)) != h2 ||
        fnv1a64(serialize_component(model.model3)) != h3)
        throw InputError("hierarchy: component hash mismatch (corrupt model file)");

    model.code1.labels = model.model1.classes;
    model.code2.labels = model.model2.classes;
    return model;
}

}  // namespace hids
