#include "brace/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "brace/bounds.hpp"
#include "brace/corpus.hpp"
#include "brace/economy_io.hpp"
#include "brace/experiments.hpp"
#include "brace/fairness.hpp"
#include "brace/solver.hpp"
#include "brace/sybil.hpp"

namespace brace {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ScenarioError("cannot read input file " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ScenarioError("cannot write " + p.string());
  out << text;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell(double v) { return csv_number(v); }
std::string cell(std::size_t v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "true" : "false"; }

std::string join_reasons(const std::vector<BadReason>& r) {
  std::string out;
  for (const auto x : r) {
    if (!out.empty()) out += ";";
    out += to_string(x);
  }
  return out;
}

class Params {
 public:
  explicit Params(const Scenario& s) : s_(s) {}

  bool has(const std::string& k) const { return s_.params.count(k) > 0; }

  std::string str(const std::string& k, const std::string& def) const {
    const auto it = s_.params.find(k);
    return it == s_.params.end() ? def : it->second;
  }

  double num(const std::string& k, double def) const {
    const auto it = s_.params.find(k);
    if (it == s_.params.end()) return def;
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size() || !std::isfinite(v)) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ScenarioError("parameter --" + k + " expects a number, got '" + it->second + "'");
    }
  }

  std::size_t count(const std::string& k, std::size_t def) const {
    const auto it = s_.params.find(k);
    if (it == s_.params.end()) return def;
    return parse_count(k, it->second);
  }

  std::vector<std::size_t> counts(const std::string& k, std::vector<std::size_t> def) const {
    const auto it = s_.params.find(k);
    if (it == s_.params.end()) return def;
    std::vector<std::size_t> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_count(k, item));
    if (out.empty()) throw ScenarioError("parameter --" + k + " is empty");
    return out;
  }

 private:
  static std::size_t parse_count(const std::string& k, const std::string& v) {
    try {
      std::size_t used = 0;
      const long long x = std::stoll(v, &used);
      if (used != v.size() || x < 0) throw std::invalid_argument("");
      return static_cast<std::size_t>(x);
    } catch (const std::exception&) {
      throw ScenarioError("parameter --" + k + " expects a non-negative integer, got '" + v + "'");
    }
  }
  const Scenario& s_;
};

SolverConfig solver_config(const Params& p, std::uint64_t seed) {
  SolverConfig c;
  c.eta0 = p.num("eta0", c.eta0);
  c.tol = p.num("tol", c.tol);
  c.max_iter = p.count("max-iter", c.max_iter);
  c.restarts = p.count("restarts", c.restarts);
  c.mc_draws = p.count("mc-draws", c.mc_draws);
  if (c.mc_draws == 0) throw ScenarioError("--mc-draws must be at least 1");
  if (!(c.eta0 > 0.0) || !(c.tol > 0.0)) throw ScenarioError("--eta0 and --tol must be positive");
  c.seed = seed;
  return c;
}

const fs::path input(const Scenario& s, const std::string& role) {
  const auto it = s.inputs.find(role);
  if (it == s.inputs.end()) throw ScenarioError("scenario kind '" + s.kind + "' needs input '" + role + "'");
  return it->second;
}

Economy economy_input(const Scenario& s) {
  try {
    return load_economy(input(s, "economy"));
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("malformed economy file: ") + e.what());
  }
}

json json_input(const Scenario& s, const std::string& role) {
  try {
    return read_json_file(input(s, role));
  } catch (const json::exception& e) {
    throw ScenarioError("malformed " + role + " file: " + e.what());
  }
}

SybilAttack attack_input(const Scenario& s, const Economy& e) {
  try {
    return parse_attack(json_input(s, "attack"), e);
  } catch (const json::exception& x) {
    throw ScenarioError(std::string("malformed attack file: ") + x.what());
  }
}

json prices_json(const PriceVector& p) { return json(p.vector()); }

// What a pipeline produces: named tables ("" is the main one) and a report.
struct Outputs {
  std::map<std::string, CsvTable> tables;
  json report = json::object();
  CsvTable& table(const std::string& name, std::vector<std::string> header) {
    return tables.emplace(name, CsvTable(std::move(header))).first->second;
  }
};

RegularityConfig regularity_config(const Params& p, const SolverConfig& solver, std::uint64_t seed) {
  RegularityConfig rc;
  rc.solver = solver;
  rc.gamma_pairs = p.count("gamma-pairs", rc.gamma_pairs);
  rc.lz_samples = p.count("lz-samples", rc.lz_samples);
  rc.radius = p.num("radius", rc.radius);
  rc.seed = stream_seed(seed, 11);
  return rc;
}

json estimates_json(const RegularityEstimates& est) {
  return {{"L_Z_hat", est.L_Z_hat},
          {"gamma_hat", est.gamma_hat},
          {"L_p_hat", est.L_p_hat},
          {"L_hat", est.L_hat},
          {"gamma_pairs", est.gamma_pairs},
          {"lz_samples", est.lz_samples},
          {"lp_pairs", est.lp_pairs}};
}

json outcome_json(const AttackOutcome& o) {
  return {{"attack", to_json(o.attack)},       {"alpha", o.alpha},
          {"base_prices", prices_json(o.base_prices)}, {"attacked_prices", prices_json(o.attacked_prices)},
          {"usable", o.usable},                {"price_shift", o.price_shift},
          {"gain", o.gain},                    {"gain_se", o.gain_se}};
}

void run_solve(const Scenario& s, const Params& p, Outputs& out) {
  const Economy e = economy_input(s);
  const auto cfg = solver_config(p, s.seed);
  const auto r = solve_brace(e, cfg);
  const auto rep = verify_clearing(e, r, p.num("clearing-tol", 10 * cfg.tol), cfg.tol_p);
  auto& t = out.table("", {"good", "price", "excess", "demand", "target", "slack", "priced", "pass", "converged",
                           "residual", "iterations"});
  for (std::size_t j = 0; j < e.goods(); ++j) {
    const auto& g = rep.goods[j];
    t.add({e.good_list()[j].name, cell(r.prices[j]), cell(r.excess[j]), cell(g.demand), cell(g.target), cell(g.slack),
           cell(g.priced), cell(g.pass), cell(r.converged), cell(r.residual), cell(r.iterations)});
  }
  json alloc = json::array();
  for (std::size_t i = 0; i < e.size(); ++i) {
    alloc.push_back({{"id", e.identity(i).id},
                     {"principal", e.identity(i).principal},
                     {"expected", r.allocation[i].expectation()},
                     {"lottery", to_json(r.allocation[i])}});
  }
  out.report = {{"prices", prices_json(r.prices)}, {"excess", r.excess},         {"residual", r.residual},
                {"iterations", r.iterations},      {"converged", r.converged},   {"restarts_used", r.restarts_used},
                {"clearing_pass", rep.pass},       {"allocation", alloc}};
}

void run_attack(const Scenario& s, const Params& p, Outputs& out) {
  const Economy e = economy_input(s);
  const auto a = attack_input(s, e);
  const auto cfg = solver_config(p, s.seed);
  const auto base = solve_economy(e, cfg);
  const auto o = evaluate_attack(base, a, CardinalUtility(), cfg);
  auto& t = out.table("", {"principal", "kind", "n", "alpha", "base_converged", "usable", "price_shift", "gain",
                           "gain_se"});
  t.add({a.principal, to_string(a.kind), cell(e.size()), cell(o.alpha), cell(base.eq.converged), cell(o.usable),
         cell(o.price_shift), cell(o.gain), cell(o.gain_se)});
  out.report = outcome_json(o);
  out.report["base_converged"] = base.eq.converged;
  out.report["base_residual"] = base.eq.residual;
}

void run_bounds_estimate(const Scenario& s, const Params& p, Outputs& out) {
  const Economy e = economy_input(s);
  const auto cfg = solver_config(p, s.seed);
  const auto solved = solve_economy(e, cfg);
  if (!solved.eq.converged) {
    auto& t = out.table("", {"converged", "L_Z_hat", "gamma_hat", "L_hat", "price_constant", "welfare_constant"});
    t.add({cell(false), "", "", "", "", ""});
    out.report = {{"converged", false}, {"residual", solved.eq.residual}};
    return;
  }
  auto rc = regularity_config(p, cfg, s.seed);
  if (p.has("principal")) rc.principals = {p.str("principal", "")};
  const auto est = estimate_regularity(solved, CardinalUtility(), rc);
  auto& t = out.table("", {"converged", "L_Z_hat", "gamma_hat", "L_hat", "price_constant", "welfare_constant"});
  t.add({cell(true), cell(est.L_Z_hat), cell(est.gamma_hat), cell(est.L_hat), cell(est.price_constant()),
         cell(est.welfare_constant())});
  auto& lp = out.table("principals", {"principal", "L_p_hat"});
  for (const auto& [name, v] : est.L_p_hat) lp.add({name, cell(v)});
  out.report = estimates_json(est);
  out.report["converged"] = true;
  out.report["prices"] = prices_json(solved.eq.prices);
}

void bound_corpus(const Scenario& s, const Params& p, Outputs& out, bool welfare) {
  CorpusBoundConfig c;
  c.economies = p.count("economies", c.economies);
  c.n = p.count("n", c.n);
  c.goods = p.count("goods", c.goods);
  c.types = p.count("types", c.types);
  c.delta = p.num("delta", c.delta);
  c.max_owned = p.count("max-owned", c.max_owned);
  c.solver = solver_config(p, s.seed);
  c.regularity = regularity_config(p, c.solver, s.seed);
  c.bad.solver = c.solver;
  c.seed = s.seed;
  c.threads = p.count("parallel", 1);
  const auto sum = corpus_bound_check(c);
  auto& t = out.table("", {"index", "n", "alpha", "observed", "bound", "satisfied", "usable", "in_bad_region",
                           "eps_hat", "reasons"});
  const double eps_hat =
      sum.trials.empty() ? 0.0 : 1.0 - static_cast<double>(sum.clean) / static_cast<double>(sum.trials.size());
  json trials = json::array();
  for (const auto& tr : sum.trials) {
    const auto& r = welfare ? tr.welfare : tr.price;
    t.add({cell(tr.index), cell(c.n), cell(tr.alpha), cell(r.observed), cell(r.bound), cell(r.satisfied),
           cell(r.usable), cell(tr.bad), cell(eps_hat), join_reasons(tr.reasons)});
    trials.push_back({{"index", tr.index},
                      {"alpha", tr.alpha},
                      {"bad", tr.bad},
                      {"observed", r.observed},
                      {"bound", r.bound},
                      {"satisfied", r.satisfied},
                      {"usable", r.usable},
                      {"constants", estimates_json(r.constants_used)}});
  }
  out.report = {{"economies", c.economies},
                {"clean", sum.clean},
                {"eps_hat", eps_hat},
                {"satisfied_clean", welfare ? sum.welfare_ok : sum.price_ok},
                {"rate_clean", welfare ? sum.welfare_rate() : sum.price_rate()},
                {"unflagged_violations", sum.unflagged_violations},
                {"trials", trials}};
}

void run_bound(const Scenario& s, const Params& p, Outputs& out, bool welfare) {
  if (!s.inputs.count("economy")) {
    bound_corpus(s, p, out, welfare);
    return;
  }
  const Economy e = economy_input(s);
  const auto a = attack_input(s, e);
  const auto cfg = solver_config(p, s.seed);
  const auto solved = solve_economy(e, cfg);
  BadRegionConfig bc;
  bc.solver = cfg;
  const auto bad = detect_bad_region(e, bc);
  const CardinalUtility u;
  const auto o = evaluate_attack(solved, a, u, cfg);
  BoundReport r;
  r.alpha = o.alpha;
  json constants;
  if (solved.eq.converged) {
    auto rc = regularity_config(p, cfg, s.seed);
    rc.principals = {a.principal};
    const auto est = estimate_regularity(solved, u, rc);
    r = welfare ? check_welfare_bound(o, est) : check_price_bound(o, est);
    constants = estimates_json(est);
  }
  auto& t = out.table("", {"n", "alpha", "observed", "bound", "satisfied", "usable", "in_bad_region", "eps_hat",
                           "reasons"});
  // A single economy is either in the bad region or not.
  t.add({cell(e.size()), cell(r.alpha), cell(r.observed), cell(r.bound), cell(r.satisfied), cell(r.usable),
         cell(bad.in_bad_region), cell(bad.in_bad_region ? 1.0 : 0.0), join_reasons(bad.reasons)});
  out.report = {{"observed", r.observed}, {"bound", r.bound},       {"satisfied", r.satisfied},
                {"usable", r.usable},     {"alpha", r.alpha},       {"in_bad_region", bad.in_bad_region},
                {"constants", constants}, {"outcome", outcome_json(o)}};
}

EconomyGenerator smooth_generator(const std::vector<IdentityType>& space, std::size_t goods, double delta) {
  return [space, goods, delta](std::size_t n, Rng& rng) { return sample_economy(space, goods, n, delta, rng); };
}

std::vector<IdentityType> template_space(const Params& p, std::uint64_t seed, CorpusTemplate& t) {
  t.goods = p.count("goods", t.goods);
  t.types = p.count("types", t.types);
  t.delta = p.num("delta", t.delta);
  const auto fam = p.str("family", "smooth");
  if (fam == "smooth") {
    t.family = TypeFamily::Smooth;
  } else if (fam == "self-demand") {
    t.family = TypeFamily::SelfDemand;
  } else {
    throw ScenarioError("unknown type family '" + fam + "'");
  }
  Rng rng = make_rng(seed, 0x7e5);
  return make_type_space(t, rng);
}

SplTable spl_table(const Scenario& s, const Params& p, SplConfig& c) {
  CorpusTemplate t;
  const auto space = template_space(p, s.seed, t);
  c.n_list = p.counts("n-list", c.n_list);
  c.replications = p.count("replications", c.replications);
  c.principal_share = p.num("share", c.principal_share);
  c.identity_deviations = p.count("identity-deviations", c.identity_deviations);
  c.principal_deviations = p.count("principal-deviations", c.principal_deviations);
  c.solver = solver_config(p, s.seed);
  c.seed = s.seed;
  c.threads = p.count("parallel", 1);
  return spl_curves(smooth_generator(space, t.goods, t.delta), space, c);
}

void run_spl(const Scenario& s, const Params& p, Outputs& out) {
  SplConfig c;
  const auto tab = spl_table(s, p, c);
  const double eps = p.num("eps", 0.1);
  auto& t = out.table("", {"n", "identity_gain", "identity_se", "principal_gain", "principal_se", "skipped"});
  for (const auto& r : tab.rows) {
    t.add({cell(r.n), cell(r.identity_mean), cell(r.identity_se), cell(r.principal_mean), cell(r.principal_se),
           cell(r.skipped)});
  }
  auto& raw = out.table("samples", {"n", "replication", "identity_gain", "principal_gain", "skipped"});
  std::vector<double> ns, gains;
  for (const auto& x : tab.samples) {
    raw.add({cell(x.n), cell(x.replication), cell(x.identity_gain), cell(x.principal_gain), cell(x.skipped)});
    ns.push_back(static_cast<double>(x.n));
    gains.push_back(x.identity_gain);
  }
  out.report = {{"n_list", c.n_list}, {"replications", c.replications}, {"share", c.principal_share},
                {"eps", eps},         {"K_hat", fit_K(tab, eps)}};
  if (ns.size() >= 2) out.report["spearman_identity_vs_n"] = spearman(ns, gains);
}

JefTrigger trigger_param(const Params& p) {
  const auto t = p.str("trigger", "set");
  if (t == "set") return JefTrigger::SetInclusion;
  if (t == "price") return JefTrigger::PriceValue;
  throw ScenarioError("unknown JEF trigger '" + t + "'");
}

json report_json(const JefReport& r) {
  json pairs = json::array();
  for (const auto& x : r.pairs) pairs.push_back({{"i", x.i}, {"j", x.j}, {"triggered", x.triggered}, {"pass", x.pass}});
  return {{"pass", r.pass}, {"pairs", pairs}};
}

void add_jef_rows(CsvTable& t, const std::string& level, const JefReport& r, const std::vector<std::string>& names) {
  for (const auto& x : r.pairs) t.add({level, names.at(x.i), names.at(x.j), cell(x.triggered), cell(x.pass)});
}

void run_fairness(const Scenario& s, const Params& p, Outputs& out) {
  auto& t = out.table("", {"level", "i", "j", "triggered", "pass"});
  if (s.inputs.count("economy")) {
    const Economy e = economy_input(s);
    const json a = json_input(s, "allocation");
    std::vector<Bundle> x;
    std::optional<PriceVector> prices;
    try {
      for (const auto& b : a.at("allocation")) x.push_back(parse_bundle(b, e.goods()));
      if (a.contains("prices")) prices = PriceVector(a.at("prices").get<std::vector<double>>());
    } catch (const json::exception& ex) {
      throw ScenarioError(std::string("malformed allocation file: ") + ex.what());
    }
    const auto trig = trigger_param(p);
    if (trig == JefTrigger::PriceValue && !prices) throw ScenarioError("price trigger needs prices in the allocation file");
    const auto r = jef_lift_check(x, e, trig, prices);
    std::vector<std::string> ids;
    for (const auto& i : e.identities()) ids.push_back(i.id);
    add_jef_rows(t, "identity", r.identity_level, ids);
    add_jef_rows(t, "principal", r.principal_level, r.principals);
    out.report = {{"identity_level", report_json(r.identity_level)},
                  {"principal_level", report_json(r.principal_level)},
                  {"principals", r.principals}};
    return;
  }
  JefSearchConfig c;
  c.goods = p.count("goods", c.goods);
  c.max_units = static_cast<int>(p.count("max-units", static_cast<std::size_t>(c.max_units)));
  c.max_identities = p.count("max-identities", c.max_identities);
  c.max_principals = p.count("max-principals", c.max_principals);
  c.max_acceptable = p.count("max-acceptable", c.max_acceptable);
  std::size_t checked = 0;
  const auto ce = find_jef_lift_counterexample(c, &checked);
  out.report = {{"found", ce.has_value()}, {"allocations_checked", checked}};
  if (!ce) {
    out.report["finding"] = "no identity-level JEF1 allocation fails principal-level JEF1 at these sizes";
    return;
  }
  std::vector<std::string> ids;
  for (const auto& i : ce->economy.identities) ids.push_back(i.id);
  add_jef_rows(t, "identity", ce->report.identity_level, ids);
  add_jef_rows(t, "principal", ce->report.principal_level, ce->report.principals);
  json alloc = json::array();
  for (const auto& b : ce->allocation) alloc.push_back(to_json(b));
  out.report["economy"] = to_json(ce->economy);
  out.report["allocation"] = alloc;
  out.report["identity_level"] = report_json(ce->report.identity_level);
  out.report["principal_level"] = report_json(ce->report.principal_level);
}

// Two goods of capacity c; one honest holder of each, the principal "S"
// holds nothing before its Sybils arrive.
Economy nonexistence_base(int capacity, double delta) {
  EconomyDescription d;
  d.goods = {{"j", capacity}, {"k", capacity}};
  for (std::size_t g = 0; g < 2; ++g) {
    const Bundle own = Bundle::unit(2, g, capacity);
    d.identities.push_back({"h" + std::to_string(g + 1), "H" + std::to_string(g + 1),
                            IdentityType(Lottery::degenerate(own), WeakOrder({{own}}))});
  }
  d.delta = delta;
  return build_economy(d);
}

void run_nonexistence(const Scenario& s, const Params& p, Outputs& out) {
  const double beta = p.num("beta", 0.5);
  const double delta = p.num("delta", 0.1);
  const std::size_t kmax = p.count("k-max", 10);
  if (kmax == 0) throw ScenarioError("--k-max must be at least 1");
  Economy base = s.inputs.count("economy") ? economy_input(s)
                                           : nonexistence_base(static_cast<int>(p.count("capacity", 1)), delta);
  const std::string principal = p.str("principal", "S");
  const std::size_t good = p.count("good", 0);
  std::vector<std::size_t> schedule(kmax);
  for (std::size_t k = 0; k < kmax; ++k) schedule[k] = k + 1;
  const auto seq = unbounded_sybil_sequence(base, principal, schedule, good, beta);
  std::vector<SybilStep> steps;
  for (std::size_t k = 0; k < seq.size(); ++k) steps.push_back(seq.at(k));
  const auto audit = feasibility_audit(steps, beta, good, base.delta());
  const double cap = (1.0 + base.delta()) * base.capacity()[good];
  auto& t = out.table("", {"k", "sybils", "share", "beta_mass", "capacity_bound", "violates"});
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const double mass = beta * static_cast<double>(steps[k].sybils.size());
    t.add({cell(k + 1), cell(steps[k].sybils.size()), cell(seq.share(k)), cell(mass), cell(cap), cell(mass > cap)});
  }
  const auto cfg = solver_config(p, s.seed);
  const auto& last = steps.back().economy;
  const auto r = solve_brace(last, cfg);
  const auto rep = verify_clearing(last, r, 10 * cfg.tol, cfg.tol_p);
  out.report = {{"first_violation", audit.first_violation ? json(*audit.first_violation) : json(nullptr)},
                {"degenerate_beta", audit.degenerate_beta},
                {"beta", beta},
                {"good", good},
                {"last_k", kmax},
                {"last_converged", r.converged},
                {"last_residual", r.residual},
                {"last_prices", prices_json(r.prices)},
                {"last_clearing_pass_on_good", rep.goods[good].pass},
                {"last_demand_on_good", rep.goods[good].demand},
                {"last_target_on_good", rep.goods[good].target}};
}

void run_tail(const Scenario& s, const Params& p, Outputs& out) {
  const std::size_t n = p.count("n", 50);
  const std::size_t owned = p.count("owned", 5);
  const std::size_t bad_every = p.count("bad-every", 6);
  TailConfig c;
  c.trials = p.count("trials", c.trials);
  c.solver = solver_config(p, s.seed);
  c.bad.solver = c.solver;
  c.seed = s.seed;
  c.threads = p.count("parallel", 1);
  c.U_bar = p.num("u-bar", static_cast<double>(owned));
  const auto sampler = mixed_tail_sampler(n, owned, bad_every, s.seed);
  json constants;
  if (p.has("c-u")) {
    c.C_U = p.num("c-u", 0.0);
  } else {
    // C_U from a clean reference draw of the same ensemble (trial index 1).
    Rng rng = make_rng(s.seed, 0xc0);
    const auto ref = sampler(1, rng);
    const auto solved = solve_economy(ref.economy, c.solver);
    if (!solved.eq.converged) throw ScenarioError("reference economy for C_U did not converge; pass --c-u");
    auto rc = regularity_config(p, c.solver, s.seed);
    rc.principals = {"M"};
    const auto est = estimate_regularity(solved, CardinalUtility(), rc);
    c.C_U = est.welfare_constant();
    constants = estimates_json(est);
  }
  const auto r = tail_bound_check(sampler, CardinalUtility(), c);
  auto& t = out.table("", {"trial", "bad", "alpha", "gain"});
  for (std::size_t k = 0; k < r.trials.size(); ++k) {
    t.add({cell(k), cell(r.trials[k].bad), cell(r.trials[k].alpha), cell(r.trials[k].gain)});
  }
  auto& sum = out.table("summary", {"n", "alpha", "eps_hat", "mean_gain", "gain_se", "C_U", "U_bar", "rhs", "satisfied"});
  sum.add({cell(n), cell(r.alpha), cell(r.eps_hat), cell(r.mean_gain), cell(r.gain_se), cell(c.C_U), cell(c.U_bar),
           cell(r.rhs), cell(r.satisfied)});
  out.report = {{"eps_hat", r.eps_hat}, {"mean_gain", r.mean_gain}, {"gain_se", r.gain_se}, {"alpha", r.alpha},
                {"C_U", c.C_U},         {"U_bar", c.U_bar},         {"rhs", r.rhs},         {"satisfied", r.satisfied},
                {"constants", constants}};
}

void run_deterrence(const Scenario& s, const Params& p, Outputs& out) {
  DeterrenceCorpusConfig c;
  c.economies = p.count("economies", c.economies);
  c.n = p.count("n", c.n);
  c.max_owned = p.count("max-owned", c.max_owned);
  c.family_size = p.count("family-size", c.family_size);
  c.delta = p.num("delta", c.delta);
  c.eps = p.num("eps", c.eps);
  c.solver = solver_config(p, s.seed);
  c.regularity = regularity_config(p, c.solver, s.seed);
  c.seed = s.seed;
  c.threads = p.count("parallel", 1);
  json spl;
  if (p.has("k-hat")) {
    c.K_hat = p.num("k-hat", 0.0);
  } else {
    SplConfig sc;
    const auto tab = spl_table(s, p, sc);
    c.K_hat = fit_K(tab, c.eps);
    spl = {{"n_list", sc.n_list}, {"replications", sc.replications}};
  }
  const auto sum = deterrence_corpus(c);
  auto& t = out.table("", {"index", "n", "usable", "net_gain", "gain_se", "deterred", "zero_cost_net_gain",
                           "zero_cost_se", "zero_cost_deterred"});
  for (const auto& r : sum.rows) {
    t.add({cell(r.index), cell(c.n), cell(r.usable), cell(r.with_cost.max_net_gain), cell(r.with_cost.se_at_max),
           cell(r.with_cost.deterred), cell(r.zero_cost.max_net_gain), cell(r.zero_cost.se_at_max),
           cell(r.zero_cost.deterred)});
  }
  out.report = {{"K_hat", c.K_hat},
                {"eps", c.eps},
                {"usable", sum.usable},
                {"deterred_everywhere", sum.deterred_everywhere},
                {"max_zero_cost_gain", sum.max_zero_cost_gain},
                {"spl", spl}};
}

void run_corpus(const Scenario& s, const Params& p, Outputs& out, const fs::path& out_dir) {
  CorpusTemplate t;
  (void)template_space(p, s.seed, t);
  t.n_list = p.counts("n-list", t.n_list);
  const std::size_t count = p.count("count", 10);
  const fs::path dir = out_dir / (s.name + "_economies");
  fs::create_directories(dir);
  const auto files = corpus_generate(t, count, s.seed, dir);
  auto& tab = out.table("", {"file", "n"});
  for (std::size_t k = 0; k < files.size(); ++k) tab.add({files[k].filename().string(), cell(t.n_list[k % t.n_list.size()])});
  out.report = {{"count", count}, {"directory", dir.filename().string()}};
}

}  // namespace

std::string config_hash(const Scenario& s) {
  json canon = {{"kind", s.kind}, {"params", s.params}, {"seed", s.seed}};
  std::uint64_t h = fnv1a64(canon.dump());
  for (const auto& [role, path] : s.inputs) {
    h = fnv1a64(role, h);
    h = fnv1a64(read_bytes(path), h);
  }
  return hex64(h);
}

Scenario parse_scenario(const json& j) {
  try {
    Scenario s;
    s.name = j.value("name", std::string("run"));
    s.kind = j.at("kind").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("inputs")) s.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    if (j.contains("params")) {
      for (const auto& [k, v] : j.at("params").items()) s.params[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    return s;
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("malformed scenario: ") + e.what());
  }
}

json to_json(const Scenario& s) {
  return {{"name", s.name}, {"kind", s.kind}, {"inputs", s.inputs}, {"params", s.params}, {"seed", s.seed}};
}

json to_json(const RunRecord& r) {
  json outs = json::array();
  for (const auto& p : r.outputs) outs.push_back(p.filename().string());
  return {{"scenario", to_json(r.scenario)},
          {"outputs", outs},
          {"wall_time", r.wall_time},
          {"tool_version", r.tool_version},
          {"config_hash", r.config_hash}};
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw SpecError("csv row width does not match header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::render(std::uint64_t seed, const std::string& hash) const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells, const std::string& a, const std::string& b) {
    for (const auto& c : cells) out += csv_escape(c) + ",";
    out += a + "," + b + "\n";
  };
  line(header_, "seed", "config_hash");
  for (const auto& r : rows_) line(r, std::to_string(seed), hash);
  return out;
}

RunRecord run_scenario(const Scenario& s, const fs::path& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  if (s.name.empty() || s.name.find_first_of("/\\") != std::string::npos) throw ScenarioError("invalid scenario name");
  RunRecord rec;
  rec.scenario = s;
  rec.config_hash = config_hash(s);
  fs::create_directories(out_dir);
  const Params p(s);
  Outputs out;
  if (s.kind == "solve") {
    run_solve(s, p, out);
  } else if (s.kind == "attack") {
    run_attack(s, p, out);
  } else if (s.kind == "bounds-estimate") {
    run_bounds_estimate(s, p, out);
  } else if (s.kind == "price-bound") {
    run_bound(s, p, out, false);
  } else if (s.kind == "welfare-bound") {
    run_bound(s, p, out, true);
  } else if (s.kind == "spl") {
    run_spl(s, p, out);
  } else if (s.kind == "fairness") {
    run_fairness(s, p, out);
  } else if (s.kind == "nonexistence") {
    run_nonexistence(s, p, out);
  } else if (s.kind == "tail") {
    run_tail(s, p, out);
  } else if (s.kind == "deterrence") {
    run_deterrence(s, p, out);
  } else if (s.kind == "corpus") {
    run_corpus(s, p, out, out_dir);
  } else {
    throw ScenarioError("unknown scenario kind '" + s.kind + "'");
  }
  for (const auto& [name, table] : out.tables) {
    const fs::path path = out_dir / (s.name + (name.empty() ? "" : "_" + name) + ".csv");
    write_text(path, table.render(s.seed, rec.config_hash));
    rec.outputs.push_back(path);
  }
  out.report["kind"] = s.kind;
  out.report["seed"] = s.seed;
  out.report["config_hash"] = rec.config_hash;
  out.report["tool_version"] = kToolVersion;
  const fs::path report = out_dir / (s.name + ".json");
  write_text(report, out.report.dump(2) + "\n");
  rec.outputs.push_back(report);
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_text(out_dir / (s.name + ".run.json"), to_json(rec).dump(2) + "\n");
  return rec;
}

}  // namespace brace
