#include "hids/config.hpp"

#include <fstream>

#include "hids/common.hpp"

namespace hids {

namespace {

uint64_t parse_u64_cfg(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an unsigned integer, got '" + value + "'");
    }
}

double parse_double_cfg(const std::string& key, const std::string& value) {
    try {
        return parse_double(value);
    } catch (const InputError&) {
        throw ConfigError(key + ": expected a number, got '" + value + "'");
    }
}

}  // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
    if (key == "run.seed") {
        seed = parse_u64_cfg(key, value);
        seed_set = true;
    } else if (key == "run.threads") {
        threads = static_cast<size_t>(parse_u64_cfg(key, value));
    } else if (key == "run.out_dir") {
        out_dir = value;
    } else if (key == "run.format") {
        if (value != "table" && value != "kv")
            throw ConfigError("run.format: expected 'table' or 'kv', got '" + value + "'");
        format = value;
    } else if (key == "run.label_column") {
        label_column = value;
    } else if (key == "split.preset") {
        split_preset = value;
    } else if (key == "split.spec_file") {
        split_spec_file = value;
    } else if (key == "clean.drop") {
        if (value != "auto" && value != "preset" && value != "constant" && value != "none")
            throw ConfigError("clean.drop: expected auto|preset|constant|none, got '" + value +
                              "'");
        clean_drop = value;
    } else if (key == "reptree.min_leaf") {
        reptree.min_leaf = static_cast<size_t>(parse_u64_cfg(key, value));
    } else if (key == "reptree.max_depth") {
        reptree.max_depth = static_cast<size_t>(parse_u64_cfg(key, value));
    } else if (key == "reptree.prune_fraction") {
        reptree.prune_fraction = parse_double_cfg(key, value);
    } else if (key == "ripper.prune_fraction") {
        ripper.prune_fraction = parse_double_cfg(key, value);
    } else if (key == "ripper.optimization_passes") {
        ripper.optimization_passes = static_cast<size_t>(parse_u64_cfg(key, value));
    } else if (key == "ripper.dl_slack_bits") {
        ripper.dl_slack_bits = parse_double_cfg(key, value);
    } else if (key == "ripper.min_rule_coverage") {
        ripper.min_rule_coverage = static_cast<size_t>(parse_u64_cfg(key, value));
    } else if (key == "forest.tree_count") {
        forest.tree_count = static_cast<size_t>(parse_u64_cfg(key, value));
    } else if (key == "forest.min_leaf") {
        forest.min_leaf = static_cast<size_t>(parse_u64_cfg(key, value));
    } else if (key == "forest.max_depth") {
        forest.max_depth = static_cast<size_t>(parse_u64_cfg(key, value));
    } else if (key == "forest.weight_increment_rate") {
        forest.weight_increment_rate = parse_double_cfg(key, value);
    } else if (key == "stack.targets") {
        if (value == "fine")
            stack_fine_targets = true;
        else if (value == "category")
            stack_fine_targets = false;
        else
            throw ConfigError("stack.targets: expected 'fine' or 'category', got '" + value + "'");
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::string line;
    std::string section;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = trim(line);
        if (s.empty() || s.front() == '#' || s.front() == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed section");
            section = std::string(trim(s.substr(1, s.size() - 2)));
            if (section.empty())
                throw ConfigError(path + ":" + std::to_string(lineno) + ": empty section name");
            continue;
        }
        size_t eq = s.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key(trim(s.substr(0, eq)));
        std::string value(trim(s.substr(eq + 1)));
        if (key.empty())
            throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw ConfigError(path + ":" + std::to_string(lineno) + ": key outside any section");
        apply(section + "." + key, value);
    }
}

void RunConfig::validate_split_source() const {
    if (!split_preset.empty() && !split_spec_file.empty())
        throw ConfigError("split: both a preset and a spec file are set; choose one");
}

}  // namespace hids
