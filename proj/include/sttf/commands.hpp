#pragma once

#include <string>

#include "sttf/config.hpp"

namespace sttf::cli {

/// Subcommand bodies. Each writes its outputs plus a manifest_<command>.json
/// into config.out_dir and returns a process exit code. All file writes go
/// through write-to-temp + atomic rename, so failures leave no partial files.
int cmd_decompose(const RunConfig& config);
int cmd_train(const RunConfig& config);
int cmd_predict(const RunConfig& config);
int cmd_evaluate(const RunConfig& config);
int cmd_baseline(const RunConfig& config);
int cmd_compare(const RunConfig& config);

}  // namespace sttf::cli
