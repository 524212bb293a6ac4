#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mvp/config.hpp"

namespace mvp {

/// Entry point shared by the `mvp` binary and the tests. Returns the process
/// exit status; failures print one line `mvp: error: <kind>: <message>` to
/// `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_prepare(const CliConfig& config, std::ostream& out);
int cmd_train(const CliConfig& config, std::ostream& out);
int cmd_eval(const CliConfig& config, std::ostream& out);
int cmd_predict(const CliConfig& config, std::ostream& out);
int cmd_ablate(const CliConfig& config, std::ostream& out);
int cmd_sweep(const CliConfig& config, std::ostream& out);
int cmd_inspect_gates(const CliConfig& config, std::ostream& out);

}  // namespace mvp
