#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "brace/corpus.hpp"
#include "brace/harness.hpp"
#include "support.hpp"

using namespace brace;
using testing_support::data_path;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("brace_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

Scenario solve_example1() {
  Scenario s;
  s.name = "ex1";
  s.kind = "solve";
  s.seed = 5;
  s.inputs["economy"] = data_path("example1.json");
  s.params["max-iter"] = "3000";
  s.params["restarts"] = "0";
  return s;
}

}  // namespace

TEST_CASE("csv numbers keep 9 significant digits") {
  CHECK(csv_number(1.0 / 3.0) == "0.333333333");
  CHECK(csv_number(123456789012.0) == "1.23456789e+11");
  CHECK(csv_number(0.0) == "0");
  CsvTable t({"a", "b"});
  t.add({"x", "1"});
  CHECK_THROWS_AS(t.add({"only"}), SpecError);
  CHECK(t.render(42, "abc") == "a,b,seed,config_hash\nx,1,42,abc\n");
}

TEST_CASE("config hash tracks params, seed and input bytes") {
  const auto s = solve_example1();
  const auto h = config_hash(s);
  CHECK(h.size() == 16);
  CHECK(config_hash(s) == h);
  auto t = s;
  t.seed = 6;
  CHECK(config_hash(t) != h);
  t = s;
  t.params["tol"] = "1e-3";
  CHECK(config_hash(t) != h);
  t = s;
  t.inputs["economy"] = data_path("example1_split.json");
  CHECK(config_hash(t) != h);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("solve on the example economy writes equilibrium json and provenance") {
  const auto dir = scratch("solve");
  const auto rec = run_scenario(solve_example1(), dir);
  CHECK(rec.outputs.size() == 2);
  CHECK(fs::exists(dir / "ex1.run.json"));
  const auto j = read_json_file(dir / "ex1.json");
  const auto prices = j.at("prices").get<std::vector<double>>();
  REQUIRE(prices.size() == 4);
  double sum = 0;
  for (double p : prices) {
    CHECK(p >= 0.0);
    sum += p;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(j.at("allocation").size() == 3);
  CHECK(j.at("allocation")[0].at("expected").size() == 4);
  const auto rows = csv_rows(dir / "ex1.csv");
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].back() == "config_hash");
  CHECK(rows[0][rows[0].size() - 2] == "seed");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    CHECK(rows[r].size() == rows[0].size());
    CHECK(rows[r][rows[0].size() - 2] == "5");
    CHECK(rows[r].back() == rec.config_hash);
  }
  const auto run = read_json_file(dir / "ex1.run.json");
  CHECK(run.at("tool_version") == kToolVersion);
  CHECK(run.at("wall_time").get<double>() >= 0.0);
}

TEST_CASE("empty attack yields a zero gain row") {
  const auto dir = scratch("attack");
  const fs::path attack = dir / "empty_attack.json";
  fs::create_directories(dir);
  std::ofstream(attack) << R"({"principal": "P", "kind": "misreport", "retyping": {}})";
  Scenario s;
  s.name = "empty";
  s.kind = "attack";
  s.inputs = {{"economy", data_path("example1.json")}, {"attack", attack.string()}};
  s.params["max-iter"] = "2000";
  s.params["restarts"] = "0";
  run_scenario(s, dir);
  const auto rows = csv_rows(dir / "empty.csv");
  REQUIRE(rows.size() == 2);
  const auto& h = rows[0];
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(h.begin(), h.end(), name) - h.begin());
  };
  CHECK(rows[1][col("alpha")] == "0");
  CHECK(rows[1][col("gain")] == "0");
}

TEST_CASE("same scenario and seed reproduce identical bytes") {
  Scenario s;
  s.name = "det";
  s.kind = "spl";
  s.seed = 9;
  s.params = {{"n-list", "10,20"}, {"replications", "2"}, {"identity-deviations", "2"},
              {"principal-deviations", "2"}, {"parallel", "2"}};
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  const auto ra = run_scenario(s, a);
  const auto rb = run_scenario(s, b);
  CHECK(ra.config_hash == rb.config_hash);
  for (const auto* f : {"det.csv", "det_samples.csv", "det.json"}) {
    INFO(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
}

TEST_CASE("malformed scenarios are errors") {
  const auto dir = scratch("bad");
  Scenario s;
  s.kind = "no-such-kind";
  CHECK_THROWS_AS(run_scenario(s, dir), ScenarioError);
  s.kind = "solve";
  CHECK_THROWS_AS(run_scenario(s, dir), ScenarioError);  // missing economy
  s.inputs["economy"] = (dir / "missing.json").string();
  CHECK_THROWS_AS(run_scenario(s, dir), ScenarioError);
  s = solve_example1();
  s.params["tol"] = "tiny";
  CHECK_THROWS_AS(run_scenario(s, dir), ScenarioError);
  s = solve_example1();
  s.params["max-iter"] = "-4";
  CHECK_THROWS_AS(run_scenario(s, dir), ScenarioError);
  CHECK_THROWS_AS(parse_scenario(nlohmann::json{{"kind", "solve"}}), ScenarioError);  // seed is mandatory
  const auto ok = parse_scenario(nlohmann::json{{"kind", "solve"}, {"seed", 3}, {"params", {{"tol", 0.001}}}});
  CHECK(ok.seed == 3);
  CHECK(ok.params.at("tol") == "0.001");
}

TEST_CASE("corpus of zero economies is an empty directory") {
  const auto dir = scratch("corpus0");
  CorpusTemplate t;
  const auto files = corpus_generate(t, 0, 1, dir);
  CHECK(files.empty());
  CHECK(fs::is_directory(dir));
  CHECK(fs::is_empty(dir));
}

TEST_CASE("corpus specs validate and cover the type space") {
  const auto dir = scratch("corpus50");
  CorpusTemplate t;
  t.types = 4;
  t.n_list = {20};
  const auto files = corpus_generate(t, 50, 17, dir);
  REQUIRE(files.size() == 50);
  std::set<std::string> types;
  for (const auto& f : files) {
    const auto e = load_economy(f);
    CHECK(e.size() == 20);
    const auto j = read_json_file(f);
    CHECK(j.at("seed") == 17);
    for (const auto& id : j.at("identities")) {
      types.insert(nlohmann::json{{"e", id.at("endowment")}, {"o", id.at("order")}}.dump());
    }
  }
  // A type is missing from all 1000 draws with probability 4·(3/4)^1000.
  CHECK(types.size() == 4);
}
