#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <list>

#include "brace/harness.hpp"

namespace {

// One subcommand: which scenario kind it runs and the raw option strings.
struct Command {
  CLI::App* app = nullptr;
  std::string kind;
  std::map<std::string, std::string> params;
  std::map<std::string, std::string> inputs;
  std::map<std::string, CLI::Option*> param_opts;
  std::map<std::string, CLI::Option*> input_opts;
};

struct Common {
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string name;
};

void param(Command& c, const std::string& flag, const std::string& help) {
  c.param_opts[flag] = c.app->add_option("--" + flag, c.params[flag], help);
}

void file(Command& c, const std::string& role, const std::string& help, bool required) {
  auto* o = c.app->add_option("--" + role, c.inputs[role], help)->check(CLI::ExistingFile);
  if (required) o->required();
  c.input_opts[role] = o;
}

Command& add(std::list<Command>& cmds, CLI::App* parent, const std::string& name, const std::string& help,
             const std::string& kind, Common& common) {
  Command& c = cmds.emplace_back();
  c.app = parent->add_subcommand(name, help);
  c.kind = kind;
  c.app->add_option("--seed", common.seed, "master seed");
  c.app->add_option("--out-dir", common.out_dir, "output directory");
  c.app->add_option("--name", common.name, "output file stem (defaults to the command)");
  param(c, "mc-draws", "Monte Carlo budget draws per demand evaluation");
  param(c, "tol", "clearing tolerance");
  param(c, "eta0", "initial step size");
  param(c, "max-iter", "iteration cap per start");
  param(c, "restarts", "random restarts after the first start");
  param(c, "parallel", "worker threads");
  return c;
}

brace::Scenario to_scenario(const Command& c, const Common& common, const std::string& stem) {
  brace::Scenario s;
  s.kind = c.kind;
  s.seed = common.seed;
  s.name = common.name.empty() ? stem : common.name;
  for (const auto& [k, o] : c.param_opts)
    if (o->count() > 0) s.params[k] = c.params.at(k);
  for (const auto& [k, o] : c.input_opts)
    if (o->count() > 0) s.inputs[k] = c.inputs.at(k);
  return s;
}

void corpus_params(Command& c) {
  param(c, "economies", "number of sampled economies");
  param(c, "n", "identities per economy");
  param(c, "goods", "number of goods");
  param(c, "types", "size of the type space");
  param(c, "delta", "capacity relaxation");
  param(c, "max-owned", "largest attacker endowment in identities");
}

void regularity_params(Command& c) {
  param(c, "gamma-pairs", "price pairs for the monotonicity estimate");
  param(c, "lz-samples", "perturbations for the excess-demand Lipschitz estimate");
  param(c, "radius", "perturbation radius");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sybil-attack experiments on pseudo-market allocation"};
  app.set_version_flag("--version", std::string(brace::kToolVersion));
  app.require_subcommand(1);
  Common common;
  std::list<Command> cmds;

  auto& solve = add(cmds, &app, "solve", "compute an approximate equilibrium", "solve", common);
  file(solve, "economy", "economy JSON", true);
  param(solve, "clearing-tol", "tolerance for the clearing verification");

  auto* attack = app.add_subcommand("attack", "evaluate a Sybil attack")->require_subcommand(1);
  auto& attack_run = add(cmds, attack, "run", "solve base and attacked economies", "attack", common);
  file(attack_run, "economy", "economy JSON", true);
  file(attack_run, "attack", "attack JSON", true);

  auto* bounds = app.add_subcommand("bounds", "regularity constants and bound checks")->require_subcommand(1);
  auto& estimate = add(cmds, bounds, "estimate", "estimate regularity constants", "bounds-estimate", common);
  file(estimate, "economy", "economy JSON", true);
  param(estimate, "principal", "principal for the allocation Lipschitz estimate");
  regularity_params(estimate);
  for (const auto& [name, kind] : {std::pair{"price", "price-bound"}, std::pair{"welfare", "welfare-bound"}}) {
    auto& b = add(cmds, bounds, name, std::string("check the ") + name + " bound (single economy or corpus)", kind,
                  common);
    file(b, "economy", "economy JSON (omit for a sampled corpus)", false);
    file(b, "attack", "attack JSON", false);
    b.input_opts["economy"]->needs(b.input_opts["attack"]);
    b.input_opts["attack"]->needs(b.input_opts["economy"]);
    corpus_params(b);
    regularity_params(b);
  }

  auto* spl = app.add_subcommand("spl", "strategyproofness-in-the-large curves")->require_subcommand(1);
  auto& curve = add(cmds, spl, "curve", "identity and principal gains against n", "spl", common);
  param(curve, "n-list", "comma-separated economy sizes");
  param(curve, "replications", "replications per size");
  param(curve, "share", "coalition share for principal deviations");
  param(curve, "identity-deviations", "deviations tried per identity sample");
  param(curve, "principal-deviations", "misreport family size per principal sample");
  param(curve, "goods", "number of goods");
  param(curve, "types", "size of the type space");
  param(curve, "delta", "capacity relaxation");
  param(curve, "family", "smooth or self-demand");
  param(curve, "eps", "target gain for the fitted decay constant");

  auto* fair = app.add_subcommand("fairness", "justified envy-freeness lifting")->require_subcommand(1);
  auto& check = add(cmds, fair, "check", "check an allocation or search for a counterexample", "fairness", common);
  file(check, "economy", "economy JSON", false);
  file(check, "allocation", "allocation JSON with an 'allocation' array and optional 'prices'", false);
  check.input_opts["economy"]->needs(check.input_opts["allocation"]);
  check.input_opts["allocation"]->needs(check.input_opts["economy"]);
  param(check, "trigger", "set or price");
  param(check, "max-units", "search: units per good");
  param(check, "max-identities", "search: identities per economy");
  param(check, "max-principals", "search: principals per economy");
  param(check, "max-acceptable", "search: acceptable bundles per type");

  auto& nonex = add(cmds, &app, "nonexistence", "unbounded Sybil sequence against capacity", "nonexistence", common);
  file(nonex, "economy", "base economy JSON (defaults to a two-good example)", false);
  param(nonex, "principal", "attacking principal");
  param(nonex, "good", "index of the targeted good");
  param(nonex, "beta", "guaranteed demand per Sybil");
  param(nonex, "k-max", "longest schedule step");
  param(nonex, "capacity", "capacity of the default example");
  param(nonex, "delta", "relaxation of the default example");

  auto& tail = add(cmds, &app, "tail", "bound under a bad-region tail", "tail", common);
  param(tail, "trials", "number of sampled economies");
  param(tail, "n", "identities per economy");
  param(tail, "owned", "identities owned by the attacker");
  param(tail, "bad-every", "every k-th trial comes from a multiple-equilibrium family");
  param(tail, "c-u", "welfare Lipschitz constant (estimated when omitted)");
  param(tail, "u-bar", "utility range of the attacker");
  regularity_params(tail);

  auto* det = app.add_subcommand("deterrence", "identity-cost deterrence")->require_subcommand(1);
  auto& det_check = add(cmds, det, "check", "attack gains net of the threshold cost", "deterrence", common);
  param(det_check, "k-hat", "decay constant (fitted from an SPL run when omitted)");
  param(det_check, "eps", "approximation target");
  param(det_check, "economies", "number of sampled economies");
  param(det_check, "n", "identities per economy");
  param(det_check, "max-owned", "largest attacker endowment");
  param(det_check, "family-size", "misreports tried per attacker");
  param(det_check, "delta", "capacity relaxation");
  param(det_check, "n-list", "SPL sizes when fitting the decay constant");
  param(det_check, "replications", "SPL replications when fitting the decay constant");
  regularity_params(det_check);

  auto& corpus = add(cmds, &app, "corpus", "write sampled economies to disk", "corpus", common);
  param(corpus, "count", "number of economies");
  param(corpus, "n-list", "comma-separated sizes, used round robin");
  param(corpus, "goods", "number of goods");
  param(corpus, "types", "size of the type space");
  param(corpus, "delta", "capacity relaxation");
  param(corpus, "family", "smooth or self-demand");

  std::string scenario_file;
  std::string run_out = "out";
  auto* run = app.add_subcommand("run", "run a scenario file");
  run->add_option("scenario", scenario_file, "scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out-dir", run_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    brace::Scenario s;
    std::string out_dir = common.out_dir;
    if (run->parsed()) {
      std::ifstream in(scenario_file);
      s = brace::parse_scenario(nlohmann::json::parse(in));
      out_dir = run_out;
    } else {
      for (const auto& c : cmds) {
        if (!c.app->parsed()) continue;
        std::string stem = c.app->get_name();
        if (c.app->get_parent() != &app) stem = c.app->get_parent()->get_name() + "_" + stem;
        s = to_scenario(c, common, stem);
      }
    }
    const auto rec = brace::run_scenario(s, out_dir);
    for (const auto& p : rec.outputs) std::cout << p.string() << "\n";
    std::cout << "config_hash " << rec.config_hash << "  wall_time " << rec.wall_time << "s\n";
    return 0;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return 2;
  } catch (const brace::SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
