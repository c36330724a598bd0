#pragma once

#include <cstdint>
#include <string>

#include "hids/forest_pa.hpp"
#include "hids/rep_tree.hpp"
#include "hids/ripper.hpp"

namespace hids {

/// Everything a pipeline command needs, merged from defaults, an INI-style
/// config file, generic key overrides, then dedicated flags (flags win).
struct RunConfig {
    uint64_t seed = 0;
    bool seed_set = false;  // train and split refuse to run without a seed
    size_t threads = 0;     // 0: all available cores
    std::string out_dir = ".";
    std::string format = "table";  // table | kv

    std::string split_preset;     // built-in quota table name
    std::string split_spec_file;  // CSV of label,train,test rows
    std::string clean_drop = "auto";  // auto | preset | constant | none
    std::string label_column;         // empty: last CSV column

    RepTreeParams reptree;
    RipperParams ripper;
    PaTreeParams forest;
    bool stack_fine_targets = true;

    /// Applies one dotted key ("section.key") with a textual value.
    /// Throws ConfigError on unknown keys or unparsable values.
    void apply(const std::string& dotted_key, const std::string& value);

    /// Merges `[section]` / `key = value` lines from a config file.
    void load_file(const std::string& path);

    /// The built-in preset or the user file, exactly one of which must be
    /// in effect; empty selections default to the cicids2017 preset.
    void validate_split_source() const;
};

}  // namespace hids
