#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "brace/economy.hpp"

namespace brace {

inline constexpr const char* kToolVersion = "0.1.0";

// Kinds: solve, attack, bounds-estimate, price-bound, welfare-bound, spl,
// fairness, nonexistence, tail, deterrence, corpus.
struct Scenario {
  std::string name = "run";
  std::string kind;
  std::map<std::string, std::string> inputs;  // role -> file path
  std::map<std::string, std::string> params;  // flag name -> value
  std::uint64_t seed = 1;
};

struct RunRecord {
  Scenario scenario;
  std::vector<std::filesystem::path> outputs;
  double wall_time = 0.0;
  std::string tool_version = kToolVersion;
  std::string config_hash;
};

// Malformed scenarios: unknown kind, missing inputs, bad parameter values.
struct ScenarioError : SpecError {
  using SpecError::SpecError;
};

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

// Digest of kind, params, seed and the bytes of every input file.
std::string config_hash(const Scenario& s);

Scenario parse_scenario(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& s);
nlohmann::json to_json(const RunRecord& r);

// Floats with 9 significant digits.
std::string csv_number(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row);
  std::size_t rows() const { return rows_.size(); }
  // Appends seed and config_hash columns to every row.
  std::string render(std::uint64_t seed, const std::string& hash) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Runs the scenario and writes <name>.csv, <name>.json (and for some kinds
// extra tables) plus <name>.run.json into out_dir. Findings such as
// violated bounds are data; malformed input throws ScenarioError or
// SpecError.
RunRecord run_scenario(const Scenario& s, const std::filesystem::path& out_dir);

}  // namespace brace
