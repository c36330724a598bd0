#pragma once

#include <string>
#include <vector>

#include "hids/config.hpp"
#include "hids/preprocess.hpp"

namespace hids {

/// Pipeline commands behind the CLI. Each throws InputError, ConfigError
/// or InternalError; the frontend maps those onto exit codes 2/3/4.

/// load -> clean -> column drop -> cleaned.csv (+ provenance).
void cmd_clean(const RunConfig& cfg, const std::vector<std::string>& inputs);

/// cleaned.csv -> train.csv + test.csv per the quota spec; any label
/// shortfall is listed and fails the command.
void cmd_split(const RunConfig& cfg, const std::string& input);

/// train.csv -> model.hids (+ timing sidecar).
void cmd_train(const RunConfig& cfg, const std::string& input);

/// model.hids + test.csv -> report.kv + report.txt (+ timing sidecar).
void cmd_evaluate(const RunConfig& cfg, const std::string& model_path, const std::string& input);

/// model.hids + feature CSV -> predictions.csv with the three stage
/// labels appended to every row.
void cmd_predict(const RunConfig& cfg, const std::string& model_path, const std::string& input);

/// Quota table from a label,train,test CSV.
SplitSpec load_split_spec(const std::string& path);

/// Union of model and truth labels in a stable report order: the
/// canonical flow-label order when everything fits it, otherwise BENIGN
/// first and remaining labels in first-appearance order.
std::vector<std::string> evaluation_vocabulary(const std::vector<std::string>& model_classes,
                                               const std::vector<std::string>& truth_labels);

}  // namespace hids
