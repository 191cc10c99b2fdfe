#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mas::cli {

enum ExitCode : int {
  kOk = 0,
  kRuntimeFailure = 1,
  kInvalidInput = 2,
  kSelectivityViolation = 3,
};

/// Entry point of the `mas` tool. `args` excludes the program name.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_validate(const std::string& net_path, std::ostream& out);
int cmd_study(const std::string& net_path, const std::string& out_path, bool strict, std::ostream& out);

struct RunOptions {
  std::string net_path;
  std::string scenario_path;
  std::string kb_path;
  std::string config_path;
  std::string log_path;
  std::string metrics_path;
  std::string static_group;
  bool has_static_group = false;
  bool strict = false;
};
int cmd_run(const RunOptions& opt, std::ostream& out);

int cmd_report(const std::string& log_path, const std::string& metrics_path, std::ostream& out);

}  // namespace mas::cli
