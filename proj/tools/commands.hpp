#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace icann::cli {

enum ExitCode { kOk = 0, kInputFailure = 1, kNumericalFailure = 2, kPropertyFailure = 3 };

struct PropertyResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Outputs {
  std::vector<std::string> files;  // relative to the output directory
  json summary = json::object();
};

Outputs cmd_generate(const json& cfg, const std::filesystem::path& out);
Outputs cmd_train(const json& cfg, const std::filesystem::path& out);
Outputs cmd_simulate(const json& cfg, const std::filesystem::path& out);
Outputs cmd_trace(const json& cfg, const std::filesystem::path& out);

std::vector<PropertyResult> run_properties(const json& cfg);
Outputs cmd_verify(const json& cfg, const std::filesystem::path& out, bool* all_pass);

/// Writes config.resolved and manifest.json next to the outputs.
void write_run_files(const std::string& command, const json& cfg, const std::filesystem::path& out,
                     const Outputs& outputs, const std::string& status);

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace icann::cli
