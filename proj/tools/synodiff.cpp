// synodiff command-line driver.
//
//   synodiff <command> --config run.ini [--pos adj|nn|verb|all] [--seed N]
//            [--out-dir DIR] [--model KIND] [--sd LIST] [--dd LIST]
//            [--freq MODE] [--tau-samples N]
//
// Exit codes: 0 success, 2 input/validation failure, 3 pipeline contract
// failure, 1 anything else.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "synodiff/config.hpp"
#include "synodiff/pipeline.hpp"
#include "synodiff/synthetic.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> pos, out_dir, model, sd, dd, freq, methods;
  std::optional<std::uint64_t> seed, tau_samples;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "run configuration (INI)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--pos", o.pos, "adj, nn, verb or all");
  cmd->add_option("--seed", o.seed, "global seed");
  cmd->add_option("--out-dir", o.out_dir, "artifact directory");
  cmd->add_option("--model", o.model, "lr, svm, constant-syn or constant-diff (evaluate: row list)");
  cmd->add_option("--sd", o.sd, "synchronic distances, e.g. cd,n10");
  cmd->add_option("--dd", o.dd, "diachronic distances, e.g. op,n100 or none");
  cmd->add_option("--freq", o.freq, "none, raw, groups or both");
  cmd->add_option("--tau-samples", o.tau_samples, "pair samples for the threshold estimate");
}

synodiff::RunConfig resolve(const Overrides& o, bool evaluate) {
  using namespace synodiff;
  auto cfg = load_config(o.config);
  if (o.pos) cfg.pos = parse_pos_filter(*o.pos);
  if (o.seed) cfg.seed = *o.seed;
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (o.model) {
    if (evaluate) cfg.methods = *o.model;
    else cfg.model.kind = parse_model_kind(*o.model);
  }
  if (o.sd) cfg.features.include_sd = parse_sd_list(*o.sd);
  if (o.dd) cfg.features.include_dd = parse_dd_list(*o.dd);
  if (o.freq) cfg.features.frequency = parse_frequency_mode(*o.freq);
  if (o.tau_samples) cfg.tau_samples = *o.tau_samples;
  cfg.features.validate();
  std::filesystem::create_directories(cfg.out_dir);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detect whether historical synonym pairs stayed synonymous"};
  app.require_subcommand(1);
  Overrides o;
  auto* build = app.add_subcommand("build-dataset", "build the labelled pair dataset and its statistics");
  auto* features = app.add_subcommand("features", "compute the feature table");
  auto* train = app.add_subcommand("train", "fit a model on the full feature table");
  auto* evaluate = app.add_subcommand("evaluate", "repeated-split evaluation of every configured method");
  auto* analyze = app.add_subcommand("analyze", "error analysis and distance distributions");
  auto* report = app.add_subcommand("report", "print the dataset statistics and results table");
  for (auto* c : {build, features, train, evaluate, analyze, report}) add_common(c, o);

  std::string fixture_dir;
  std::uint64_t fixture_seed = 1;
  std::size_t fixture_pairs = 500;
  auto* gen = app.add_subcommand("generate-fixture", "write a synthetic resource set and config");
  gen->add_option("--out", fixture_dir, "target directory")->required();
  gen->add_option("--seed", fixture_seed, "generator seed");
  gen->add_option("--pairs", fixture_pairs, "number of pairs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      synodiff::synthetic::WorldSpec spec;
      spec.n_pairs = fixture_pairs;
      spec.seed = fixture_seed;
      synodiff::synthetic::write_fixture(synodiff::synthetic::make_world(spec), fixture_dir, fixture_seed);
      return 0;
    }
    const auto cfg = resolve(o, evaluate->parsed());
    if (build->parsed()) synodiff::pipeline::cmd_build_dataset(cfg);
    else if (features->parsed()) synodiff::pipeline::cmd_features(cfg);
    else if (train->parsed()) synodiff::pipeline::cmd_train(cfg);
    else if (evaluate->parsed()) synodiff::pipeline::cmd_evaluate(cfg);
    else if (analyze->parsed()) synodiff::pipeline::cmd_analyze(cfg);
    else if (report->parsed()) std::cout << synodiff::pipeline::cmd_report(cfg);
    return 0;
  } catch (const synodiff::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const synodiff::ContractError& e) {
    std::cerr << "contract error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
