#include "hids/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <unordered_map>

#include "hids/csv.hpp"
#include "hids/hierarchy.hpp"
#include "hids/metrics.hpp"

namespace hids {

namespace fs = std::filesystem;

namespace {

std::string out_path(const RunConfig& cfg, const std::string& name) {
    if (cfg.out_dir.empty()) return name;
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_timing(const RunConfig& cfg, const std::string& file, const std::string& key,
                  double seconds) {
    std::ofstream out(out_path(cfg, file), std::ios::binary);
    if (!out) throw InputError("cannot write timing sidecar '" + file + "'");
    out << key << " " << format_double(seconds) << "\n";
}

LoadOptions load_options(const RunConfig& cfg) {
    LoadOptions opts;
    opts.label_column = cfg.label_column;
    return opts;
}

HierarchicalModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open model file '" + path + "'");
    return HierarchicalModel::load(in);
}

}  // namespace

void cmd_clean(const RunConfig& cfg, const std::vector<std::string>& inputs) {
    if (inputs.empty()) throw InputError("clean: no input files given");
    LoadOptions opts = load_options(cfg);
    Dataset data = load_csv_file(inputs[0], opts);
    for (size_t i = 1; i < inputs.size(); ++i) append_dataset(data, load_csv_file(inputs[i], opts));

    size_t features_before = data.width();
    CleanStats cs = clean(data);

    std::string mode = cfg.clean_drop;
    if (mode == "auto") mode = data.schema().cicids_layout ? "preset" : "constant";
    DropStats ds;
    if (mode == "preset")
        ds = drop_features(data, cicids2017_drop_list(data.schema()));
    else if (mode == "constant")
        ds = drop_constant_features(data);

    write_csv_file(data, out_path(cfg, "cleaned.csv"));
    write_provenance(data, out_path(cfg, "cleaned.provenance"));
    std::cout << "rows " << cs.rows_before << " -> " << cs.rows_after << " (removed "
              << cs.rows_removed << ")\n";
    std::cout << "features " << features_before << " -> " << data.width() << " (dropped "
              << ds.dropped.size() << ")\n";
    for (const auto& name : ds.dropped) std::cout << "  dropped " << name << "\n";
}

SplitSpec load_split_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open split spec '" + path + "'");
    CsvReader reader(in);
    std::vector<std::string> fields;
    size_t line = 0;
    if (!reader.next(fields, line) || fields.size() != 3)
        throw InputError(path + ": expected a label,train,test header");
    SplitSpec spec;
    while (reader.next(fields, line)) {
        if (fields.size() != 3)
            throw InputError(path + ":" + std::to_string(line) + ": expected 3 fields");
        LabelQuota q;
        q.label = std::string(trim(fields[0]));
        try {
            q.train_count = std::stoull(std::string(trim(fields[1])));
            q.test_count = std::stoull(std::string(trim(fields[2])));
        } catch (const std::exception&) {
            throw InputError(path + ":" + std::to_string(line) + ": malformed count");
        }
        spec.quotas.push_back(std::move(q));
    }
    if (spec.quotas.empty()) throw InputError(path + ": no quota rows");
    return spec;
}

void cmd_split(const RunConfig& cfg, const std::string& input) {
    if (!cfg.seed_set) throw ConfigError("split: a seed is required (--seed)");
    cfg.validate_split_source();
    SplitSpec spec;
    if (!cfg.split_spec_file.empty()) {
        spec = load_split_spec(cfg.split_spec_file);
    } else {
        std::string preset = cfg.split_preset.empty() ? "cicids2017" : cfg.split_preset;
        if (preset != "cicids2017")
            throw ConfigError("split: unknown preset '" + preset + "'");
        spec = SplitSpec::cicids2017();
    }

    Dataset data = load_csv_file(input, load_options(cfg));
    SplitResult res = split(data, spec, cfg.seed);
    if (!res.shortfalls.empty()) {
        for (const auto& s : res.shortfalls)
            std::cerr << "short label '" << s.label << "': train " << s.got_train << "/"
                      << s.wanted_train << ", test " << s.got_test << "/" << s.wanted_test
                      << "\n";
        throw InputError("split: " + std::to_string(res.shortfalls.size()) +
                         " label(s) short of their quotas");
    }

    write_csv_file(res.train, out_path(cfg, "train.csv"));
    write_csv_file(res.test, out_path(cfg, "test.csv"));
    write_provenance(res.train, out_path(cfg, "train.provenance"));
    write_provenance(res.test, out_path(cfg, "test.provenance"));

    std::unordered_map<std::string, std::pair<uint64_t, uint64_t>> written;
    for (size_t i = 0; i < res.train.size(); ++i) ++written[res.train.fine_label_name(i)].first;
    for (size_t i = 0; i < res.test.size(); ++i) ++written[res.test.fine_label_name(i)].second;

    size_t name_w = std::string("Total").size();
    for (const auto& q : spec.quotas) name_w = std::max(name_w, q.label.size());
    std::cout << "Label" << std::string(name_w - 5 + 2, ' ') << "   Train    Test\n";
    uint64_t train_total = 0, test_total = 0;
    for (const auto& q : spec.quotas) {
        auto [tr, te] = written[q.label];
        train_total += tr;
        test_total += te;
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%8llu%8llu", static_cast<unsigned long long>(tr),
                      static_cast<unsigned long long>(te));
        std::cout << q.label << std::string(name_w - q.label.size() + 2, ' ') << buf << "\n";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%8llu%8llu", static_cast<unsigned long long>(train_total),
                  static_cast<unsigned long long>(test_total));
    std::cout << "Total" << std::string(name_w - 5 + 2, ' ') << buf << "\n";
}

void cmd_train(const RunConfig& cfg, const std::string& input) {
    if (!cfg.seed_set) throw ConfigError("train: a seed is required (--seed)");
    Dataset data = load_csv_file(input, load_options(cfg));

    StackParams params;
    params.reptree = cfg.reptree;
    params.ripper = cfg.ripper;
    params.forest = cfg.forest;
    params.seed = cfg.seed;
    params.fine_targets = cfg.stack_fine_targets;

    auto t0 = std::chrono::steady_clock::now();
    HierarchicalModel model = train_hierarchy(data, params);
    double secs = seconds_since(t0);

    {
        std::ofstream out(out_path(cfg, "model.hids"), std::ios::binary);
        if (!out) throw InputError("cannot write model file");
        model.save(out);
        if (!out) throw InputError("model write failed");
    }
    write_timing(cfg, "timing-train.kv", "train_seconds", secs);
    std::cout << "trained on " << data.size() << " rows, " << data.width() << " base features\n";
    std::cout << "stage1 nodes " << model.model1.tree.nodes.size() << ", stage2 rules "
              << model.model2.rules.size() << ", stage3 trees " << model.model3.trees.size()
              << "\n";
    std::cout << "train_seconds " << format_double(secs) << "\n";
}

std::vector<std::string> evaluation_vocabulary(const std::vector<std::string>& model_classes,
                                               const std::vector<std::string>& truth_labels) {
    std::vector<std::string> members;
    auto add = [&](const std::string& s) {
        if (std::find(members.begin(), members.end(), s) == members.end()) members.push_back(s);
    };
    for (const auto& s : model_classes) add(s);
    for (const auto& s : truth_labels) add(s);

    auto canonical_order = [&](const std::vector<std::string>& canon)
        -> std::optional<std::vector<std::string>> {
        for (const auto& m : members)
            if (std::find(canon.begin(), canon.end(), m) == canon.end()) return std::nullopt;
        std::vector<std::string> out;
        for (const auto& c : canon)
            if (std::find(members.begin(), members.end(), c) != members.end()) out.push_back(c);
        return out;
    };
    if (auto v = canonical_order(cicids2017_fine_labels())) return *v;
    if (auto v = canonical_order(LabelView::category(cicids2017_fine_labels()).vocabulary))
        return *v;
    auto benign = std::find(members.begin(), members.end(), "BENIGN");
    if (benign != members.end()) std::rotate(members.begin(), benign, benign + 1);
    return members;
}

void cmd_evaluate(const RunConfig& cfg, const std::string& model_path, const std::string& input) {
    HierarchicalModel model = load_model(model_path);
    Dataset test = load_csv_file(input, load_options(cfg));
    if (test.empty()) throw InputError("evaluate: no records in '" + input + "'");

    auto t0 = std::chrono::steady_clock::now();
    std::vector<StagedPrediction> staged = predict_batch(model, test, cfg.threads);
    double secs = seconds_since(t0);

    // Truth labels expressed in the final stage's label space.
    std::vector<std::string> truths(test.size());
    if (model.view3.kind == LabelView::Kind::category) {
        LabelView v = LabelView::category(test.schema().fine_labels);
        for (size_t i = 0; i < test.size(); ++i)
            truths[i] = v.vocabulary[static_cast<size_t>(v.map(test.fine_label(i)))];
    } else {
        for (size_t i = 0; i < test.size(); ++i) truths[i] = test.fine_label_name(i);
    }

    std::vector<std::string> vocab = evaluation_vocabulary(model.model3.classes, truths);
    std::unordered_map<std::string, int32_t> index;
    for (size_t i = 0; i < vocab.size(); ++i) index[vocab[i]] = static_cast<int32_t>(i);

    std::vector<int32_t> pred_idx(test.size()), truth_idx(test.size());
    for (size_t i = 0; i < test.size(); ++i) {
        pred_idx[i] = index.at(model.final_label(staged[i].out3));
        truth_idx[i] = index.at(truths[i]);
    }

    ConfusionMatrix cm = confusion(pred_idx, truth_idx, vocab);
    MetricsReport report = build_report(cm);
    {
        std::ofstream out(out_path(cfg, "report.kv"), std::ios::binary);
        if (!out) throw InputError("cannot write report.kv");
        emit_kv(report, out);
    }
    {
        std::ofstream out(out_path(cfg, "report.txt"), std::ios::binary);
        if (!out) throw InputError("cannot write report.txt");
        emit_table(report, out);
    }
    write_timing(cfg, "timing-evaluate.kv", "test_seconds", secs);

    report.test_seconds = secs;
    if (cfg.format == "kv")
        emit_kv(report, std::cout);
    else
        emit_table(report, std::cout);
}

void cmd_predict(const RunConfig& cfg, const std::string& model_path, const std::string& input) {
    HierarchicalModel model = load_model(model_path);
    std::ifstream in(input, std::ios::binary);
    if (!in) throw InputError("cannot open '" + input + "'");
    CsvReader reader(in);
    std::vector<std::string> fields;
    size_t line = 0;
    if (!reader.next(fields, line)) throw InputError(input + ": empty file");

    std::vector<std::string> header;
    for (const auto& f : fields) header.emplace_back(trim(f));
    const size_t w = model.base_width;
    bool labeled;
    if (header.size() == w)
        labeled = false;
    else if (header.size() == w + 1)
        labeled = true;
    else
        throw InputError(input + ": expected " + std::to_string(w) + " or " +
                         std::to_string(w + 1) + " columns, found " +
                         std::to_string(header.size()));

    DatasetSchema schema;
    for (size_t j = 0; j < w; ++j) {
        schema.feature_names.push_back(header[j]);
        schema.feature_kinds.push_back(FeatureKind::numeric);
    }
    schema.label_column = labeled ? header.back() : "Label";
    schema.fine_labels = {"unlabeled"};
    Dataset data(schema);

    std::vector<std::vector<std::string>> raw_rows;
    std::vector<std::string> errors;
    std::vector<double> row(w);
    while (reader.next(fields, line)) {
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;
        if (fields.size() != header.size()) {
            errors.push_back(input + ":" + std::to_string(line) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
            continue;
        }
        bool ok = true;
        for (size_t j = 0; j < w; ++j) {
            if (!parse_feature_cell(fields[j], row[j])) {
                errors.push_back(input + ":" + std::to_string(line) + ": column '" + header[j] +
                                 "': cannot parse '" + std::string(trim(fields[j])) + "'");
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        data.append_row(row, 0);
        raw_rows.push_back(fields);
    }
    if (!errors.empty()) {
        for (const auto& e : errors) std::cerr << e << "\n";
        throw InputError(std::to_string(errors.size()) + " malformed row(s) in '" + input + "'");
    }

    std::vector<StagedPrediction> staged = predict_batch(model, data, cfg.threads);

    std::ofstream out(out_path(cfg, "predictions.csv"), std::ios::binary);
    if (!out) throw InputError("cannot write predictions.csv");
    std::vector<std::string> out_row = header;
    out_row.push_back("stage1_label");
    out_row.push_back("stage2_label");
    out_row.push_back("predicted_label");
    write_csv_row(out, out_row);
    for (size_t i = 0; i < raw_rows.size(); ++i) {
        out_row = raw_rows[i];
        out_row.push_back(model.code1.labels[static_cast<size_t>(staged[i].out1)]);
        out_row.push_back(model.code2.labels[static_cast<size_t>(staged[i].out2)]);
        out_row.push_back(model.final_label(staged[i].out3));
        write_csv_row(out, out_row);
    }
    if (!out) throw InputError("predictions write failed");
    std::cout << "predicted " << raw_rows.size() << " rows\n";
}

}  // namespace hids
