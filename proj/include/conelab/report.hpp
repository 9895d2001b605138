#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "conelab/manifest.hpp"
#include "json.hpp"

namespace conelab {

using Json = nlohmann::ordered_json;

enum class CheckStatus { Pass, Fail, Undetermined };
std::string to_string(CheckStatus s);

struct CheckRecord {
  std::string name;
  std::string op;
  CheckStatus status = CheckStatus::Fail;
  std::uint64_t seed = kDefaultSeed;
  Json residuals = Json::object();
  Json tolerances = Json::object();  // exactly the values compared against
  Json details = Json::object();
  std::string error;                 // set when the check threw
  std::optional<double> wall_time;   // seconds, only with timing enabled

  Json to_json() const;
};

struct RunOptions {
  std::uint64_t default_seed = kDefaultSeed;
  std::optional<double> tol_override;  // replaces built-in defaults, not values set in the manifest
  bool timing = false;
  bool concurrent = true;
};

// CONELAB_SEED if set and valid, else 42. InvalidArgument on a malformed value.
std::uint64_t seed_from_env();

// Runs every manifest check. Checks run concurrently; records come back in manifest order.
std::vector<CheckRecord> run_checks(const Manifest& manifest, const Model& model, const RunOptions& opts);

// One report document: header (tool, command, seed, override), records, summary.
Json make_report(const std::string& command, const RunOptions& opts, const std::vector<CheckRecord>& records,
                 Json header_extra = Json::object());

bool all_passed(const std::vector<CheckRecord>& records);

// Fills status from residual <= tolerance for every tolerance key that names a residual.
void judge(CheckRecord& rec);

}  // namespace conelab
