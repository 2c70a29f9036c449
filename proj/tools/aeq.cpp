// Command-line front end: generate, profile, simulate, mutate, report.

#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "aeq/commands.hpp"

namespace {

void add_common(CLI::App* cmd, aeq::CommonOptions& o, bool with_schema = true) {
  cmd->add_option("--config", o.config, "Run configuration file (JSON)");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_flag("--trace", o.trace, "Write the iteration trace");
  if (!with_schema) return;
  cmd->add_option("--schema", o.schema, "Context schema file (JSON)");
  cmd->add_option("--rho", o.rho, "EP violence ratio");
  cmd->add_option("--epsilon", o.epsilon, "EP minimum violent distance");
  cmd->add_option("--window-max", o.window_max, "EP longest window, in transitions");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Artificial earthquake generation and adaptation-policy mutation testing"};
  app.require_subcommand(1);
  app.set_version_flag("--version", aeq::kToolVersion);

  aeq::GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Search for an AEQ suite covering the pairwise universe");
  add_common(g, gen);
  g->add_option("--count", gen.count, "Number of AEQs (default: config suite_size, else 20)");
  g->add_option("--flow-length", gen.flow_length, "Instances per AEQ");
  g->add_flag("--no-aspiration", gen.no_aspiration, "Disable the tabu aspiration criterion");

  aeq::ProfileOptions prof;
  auto* p = app.add_subcommand("profile", "Earthquake-profile report of every flow in a CSV file");
  add_common(p, prof);
  p->add_option("flow", prof.flow, "Flow CSV")->required();

  aeq::SimulateOptions sim;
  auto* s = app.add_subcommand("simulate", "Run the adaptation policy over flows and write traces");
  add_common(s, sim);
  s->add_option("--policy", sim.policy, "Policy rule file");
  s->add_option("--initial", sim.initial_variant, "Initial variant as a JSON object");
  s->add_option("flow", sim.flow, "Flow CSV")->required();

  aeq::MutateOptions mut;
  auto* mu = app.add_subcommand("mutate", "Run the mutation experiment over generated suites");
  add_common(mu, mut);
  mu->add_option("--policy", mut.policy, "Policy rule file");
  mu->add_option("--plan", mut.plan, "Mutant plan (JSON)");
  mu->add_option("--initial", mut.initial_variant, "Initial variant as a JSON object");
  mu->add_option("--suite", mut.suites, "Suite directory written by generate (repeatable)")->required();

  aeq::ReportOptions rep;
  auto* r = app.add_subcommand("report", "Summarize a kill matrix");
  add_common(r, rep, false);
  r->add_option("--format", rep.format, "text, json or csv")
      ->check(CLI::IsMember({"text", "json", "csv"}))
      ->capture_default_str();
  r->add_option("matrix", rep.matrix, "kill_matrix.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    std::string summary;
    if (*g) summary = aeq::cmd_generate(gen);
    else if (*p) summary = aeq::cmd_profile(prof);
    else if (*s) summary = aeq::cmd_simulate(sim);
    else if (*mu) summary = aeq::cmd_mutate(mut);
    else summary = aeq::cmd_report(rep);
    std::cout << summary;
    return 0;
  } catch (const aeq::Error& e) {
    std::cerr << "aeq: " << aeq::to_string(e.category()) << " error: " << e.what() << '\n';
    return aeq::exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "aeq: internal error: " << e.what() << '\n';
    return 5;
  }
}
