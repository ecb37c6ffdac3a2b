#pragma once

#include "cartan/sprawl.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cartan {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "1.0.0";

struct RunOptions {
  std::optional<std::string> suite;
  std::optional<std::uint64_t> seed;
  bool exact = false;
  std::optional<int> mesh;
};

const std::vector<std::string>& suite_names();

// throws ConfigInvalid naming the offending path
Json load_config_file(const std::string& path);
// applies command-line overrides and checks every field; the result is echoed in the report
Json effective_config(const Json& cfg, const RunOptions& opt);

Json run_suite(const Json& cfg, const RunOptions& opt = {});
bool report_ok(const Json& report);
std::string report_csv(const Json& report);

Scenario parse_scenario(const Json& j, const std::string& path = "scenario");
Rat parse_rat(const Json& j, const std::string& path);
std::string rat_str(const Rat& r);
Json to_json(const P2& p);
Json to_json(const Certificate& c);

}  // namespace cartan
