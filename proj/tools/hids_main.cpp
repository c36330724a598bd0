#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hids/commands.hpp"
#include "hids/common.hpp"

namespace {

void apply_overrides(hids::RunConfig& cfg, const std::vector<std::string>& sets) {
    for (const auto& item : sets) {
        size_t eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw hids::ConfigError("--set expects section.key=value, got '" + item + "'");
        std::string key(hids::trim(item.substr(0, eq)));
        std::string value(hids::trim(item.substr(eq + 1)));
        if (key.find('.') == std::string::npos)
            throw hids::ConfigError("--set key '" + key + "' is missing its section");
        cfg.apply(key, value);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchical network-flow intrusion detector"};
    app.require_subcommand(1);
    app.fallthrough(true);

    std::string config_path;
    uint64_t seed = 0;
    size_t threads = 0;
    std::string out_dir;
    std::string format;
    std::vector<std::string> sets;

    app.add_option("--config", config_path, "config file (INI-style sections)");
    auto* seed_opt = app.add_option("--seed", seed, "master seed (required by split and train)");
    auto* threads_opt = app.add_option("--threads", threads, "worker threads, 0 = all cores");
    auto* out_dir_opt = app.add_option("--out-dir", out_dir, "directory for output files");
    auto* format_opt = app.add_option("--format", format, "stdout report format")
                           ->check(CLI::IsMember({"table", "kv"}));
    app.add_option("--set", sets, "override one config key, e.g. --set forest.tree_count=60")
        ->allow_extra_args(false);

    std::vector<std::string> clean_inputs;
    std::string split_input, train_input;
    std::string evaluate_model, evaluate_input;
    std::string predict_model, predict_input;

    auto* cmd_clean = app.add_subcommand("clean", "merge CSVs, drop marker rows and dead columns");
    cmd_clean->add_option("inputs", clean_inputs, "labeled CSV files")->required()->expected(-1);

    auto* cmd_split = app.add_subcommand("split", "draw the seeded train/test split");
    cmd_split->add_option("input", split_input, "cleaned CSV")->required();

    auto* cmd_train = app.add_subcommand("train", "train the three-stage model");
    cmd_train->add_option("input", train_input, "training CSV")->required();

    auto* cmd_evaluate = app.add_subcommand("evaluate", "score a model on a labeled CSV");
    cmd_evaluate->add_option("model", evaluate_model, "model file")->required();
    cmd_evaluate->add_option("input", evaluate_input, "labeled test CSV")->required();

    auto* cmd_predict = app.add_subcommand("predict", "label a CSV with all three stage outputs");
    cmd_predict->add_option("model", predict_model, "model file")->required();
    cmd_predict->add_option("input", predict_input, "feature CSV, label column optional")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    try {
        hids::RunConfig cfg;
        if (!config_path.empty()) cfg.load_file(config_path);
        apply_overrides(cfg, sets);
        if (seed_opt->count() > 0) {
            cfg.seed = seed;
            cfg.seed_set = true;
        }
        if (threads_opt->count() > 0) cfg.threads = threads;
        if (out_dir_opt->count() > 0) cfg.out_dir = out_dir;
        if (format_opt->count() > 0) cfg.format = format;

        if (cmd_clean->parsed())
            hids::cmd_clean(cfg, clean_inputs);
        else if (cmd_split->parsed())
            hids::cmd_split(cfg, split_input);
        else if (cmd_train->parsed())
            hids::cmd_train(cfg, train_input);
        else if (cmd_evaluate->parsed())
            hids::cmd_evaluate(cfg, evaluate_model, evaluate_input);
        else if (cmd_predict->parsed())
            hids::cmd_predict(cfg, predict_model, predict_input);
        return 0;
    } catch (const hids::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const hids::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const hids::InternalError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
}
