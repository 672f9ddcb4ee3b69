#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "ampse/error.hpp"
#include "ampse/harness.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> threads;
  std::string out;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "base seed; trial k uses seed + k");
  cmd->add_option("--trials", o.trials, "number of trials")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "CSV output path ('-' for stdout)");
}

ampse::ExperimentConfig load(const std::string& path, const Overrides& o) {
  auto c = ampse::load_config(path);
  if (o.seed) c.base_seed = *o.seed;
  if (o.trials) c.trials = *o.trials;
  if (o.threads) c.threads = *o.threads;
  if (!o.out.empty()) c.output = o.out;
  return c;
}

int execute(ampse::ExperimentConfig c, std::optional<ampse::ExperimentKind> expected) {
  if (expected && c.kind != *expected) {
    std::cerr << "error: config kind is " << ampse::to_string(c.kind) << ", this command needs "
              << ampse::to_string(*expected) << '\n';
    return 2;
  }
  ampse::validate_config(c);
  const bool to_stdout = c.output.empty() || c.output == "-";
  std::ofstream file, summary;
  if (!to_stdout) {
    file.open(c.output, std::ios::binary);
    if (!file) throw ampse::InvalidArgument("cannot write '" + c.output + "'");
    if (c.kind == ampse::ExperimentKind::cs_mc) summary.open(c.output + ".summary.csv", std::ios::binary);
  }
  std::ostream& csv = to_stdout ? std::cout : file;
  const ampse::Report report = ampse::run_experiment(c, csv, summary.is_open() ? &summary : nullptr);
  ampse::print_report(to_stdout ? std::cerr : std::cout, report);
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate message passing and state evolution experiments"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides over;

  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  add_overrides(run, over);

  auto* sweep = app.add_subcommand("sweep", "delta sweep and critical delta bisection");
  sweep->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  add_overrides(sweep, over);

  auto* check = app.add_subcommand("check", "equivalence and state evolution checks");
  check->require_subcommand(1);
  auto* embed = check->add_subcommand("embed", "CS AMP vs bipartite vs symmetric orbit");
  embed->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  add_overrides(embed, over);
  auto* se = check->add_subcommand("se", "symmetric orbit statistics vs general state evolution");
  se->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  add_overrides(se, over);

  auto* validate = app.add_subcommand("validate", "lint a config file");
  validate->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      const auto c = ampse::load_config(config_path);
      ampse::validate_config(c);
      std::cout << "ok " << ampse::to_string(c.kind) << ' ' << ampse::config_hash(c) << '\n';
      return 0;
    }
    if (*run) return execute(load(config_path, over), std::nullopt);
    if (*sweep) return execute(load(config_path, over), ampse::ExperimentKind::sweep);
    if (*embed) return execute(load(config_path, over), ampse::ExperimentKind::embed_check);
    if (*se) return execute(load(config_path, over), ampse::ExperimentKind::general_se_check);
  } catch (const ampse::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
