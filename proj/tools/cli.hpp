#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pilin/process.hpp"
#include "pilin/rank.hpp"
#include "pilin/runtime.hpp"
#include "pilin/validity.hpp"

namespace pilin::cli {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int {
  kOk = 0,
  kInvalid = 1,
  kIllTyped = 2,
  kIllFormed = 3,
  kResourceLimit = 4,
};

struct CheckOptions {
  std::optional<std::size_t> oracle_bound;
  bool derivation = false;
  std::optional<std::string> emit_automata;  // output directory
};

struct RunOptions {
  Policy policy;
  std::uint64_t fuel = 10'000;
  bool trace = false;
  bool unchecked = false;
};

struct Report {
  std::string command;
  std::string path;
  std::vector<Diagnostic> diagnostics;
  std::string error;                      // first blocking error, if any
  std::string error_kind;                 // parse, ill-formed, ill-typed, resource
  std::optional<RankTable> ranks;
  std::vector<std::string> definitions;   // program order
  std::optional<bool> quasi_typed;
  std::optional<Verdict> verdict;
  std::optional<std::string> derivation;
  std::optional<nlohmann::json> graph;     // with derivation
  std::optional<Trace> trace;
  bool include_trace = false;
  std::string policy;                     // run only
  int exit_code = kOk;
};

Report cmd_check(const std::string& path, const CheckOptions& options);
Report cmd_run(const std::string& path, const RunOptions& options);
Report cmd_rank(const std::string& path);

nlohmann::json to_json(const Report& report);
void print_text(const Report& report, std::ostream& out);

/// Default fuel, taken from PILIN_FUEL when set.
std::uint64_t default_fuel();

/// Entry point shared by the executable and the tests.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pilin::cli
