#pragma once

#include <string>
#include <vector>

#include "run_config.hpp"

namespace chanchart::cli {

int cmd_generate(const RunConfig& cfg);
int cmd_featurize(const RunConfig& cfg);
int cmd_train(const RunConfig& cfg);
int cmd_evaluate(const RunConfig& cfg);
int cmd_compare(const RunConfig& base, const std::vector<std::string>& config_files);

} // namespace chanchart::cli
