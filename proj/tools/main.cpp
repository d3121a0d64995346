#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "evitrack/checks.hpp"
#include "evitrack/io.hpp"
#include "evitrack/metric.hpp"
#include "evitrack/simulator.hpp"

namespace {

using namespace evitrack;

struct EvalArgs {
  std::string annotations;
  std::string predictions;
  double alpha = 0.2;
  double beta = 0.3;
  std::string attribute;
  std::string out;
};

struct SimulateArgs {
  std::string config;
  std::string out = "sim_out";
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<double> theta_eh;
  std::optional<double> theta_det;
};

struct CheckArgs {
  std::string target;
  std::optional<int> cases;
  std::optional<std::uint64_t> seed;
};

void append_result_row(std::ostringstream& out, std::size_t name_width,
                       const std::string& id, const SequenceResult& r) {
  out << std::left << std::setw(static_cast<int>(name_width) + 2) << id
      << std::right << std::setw(7) << r.num_frames << std::setw(9)
      << r.num_visible << std::setw(10) << r.num_failures << std::setw(10)
      << format_fixed(r.accuracy_term, 6) << std::setw(10)
      << format_fixed(r.penalty_term, 6) << std::setw(10)
      << format_fixed(r.acc, 6) << "\n";
}

void append_header_row(std::ostringstream& out, std::size_t name_width) {
  out << std::left << std::setw(static_cast<int>(name_width) + 2) << "sequence"
      << std::right << std::setw(7) << "frames" << std::setw(9) << "visible"
      << std::setw(10) << "failures" << std::setw(10) << "accuracy"
      << std::setw(10) << "penalty" << std::setw(10) << "acc" << "\n";
}

int run_eval(const EvalArgs& args) {
  const auto pairs = load_eval_pairs(args.annotations, args.predictions);
  const EvalConfig config{args.alpha, args.beta};

  std::optional<Attribute> attribute;
  if (!args.attribute.empty()) {
    attribute = attribute_from_string(args.attribute);
    if (!attribute) {
      throw std::runtime_error("unknown attribute \"" + args.attribute +
                               "\" (expected OV, OC, FM, SV, IC, DBC, or TS)");
    }
  }

  std::size_t name_width = 8;
  for (const auto& pair : pairs) {
    name_width = std::max(name_width, pair.annotations.sequence_id.size());
  }

  std::ostringstream report;
  append_header_row(report, name_width);
  std::vector<SequenceResult> results;
  results.reserve(pairs.size());
  for (const auto& pair : pairs) {
    results.push_back(evaluate_sequence(pair.annotations.frames,
                                        pair.predictions.frames, config));
    append_result_row(report, name_width, pair.annotations.sequence_id,
                      results.back());
  }
  report << "dataset mean acc: " << format_fixed(evaluate_dataset(results), 6)
         << "  (" << pairs.size()
         << (pairs.size() == 1 ? " sequence)" : " sequences)") << "\n";

  if (attribute) {
    report << "\nattribute " << to_string(*attribute) << " slices:\n";
    append_header_row(report, name_width);
    std::vector<SequenceResult> slices;
    for (const auto& pair : pairs) {
      const auto slice = attribute_slice(pair.annotations.frames,
                                         pair.predictions.frames, *attribute,
                                         config);
      if (slice) {
        slices.push_back(*slice);
        append_result_row(report, name_width, pair.annotations.sequence_id,
                          *slice);
      } else {
        report << std::left << std::setw(static_cast<int>(name_width) + 2)
               << pair.annotations.sequence_id << "(no "
               << to_string(*attribute) << " frames)\n";
      }
    }
    if (slices.empty()) {
      report << "no sequence has " << to_string(*attribute) << " frames\n";
    } else {
      report << "attribute mean acc: "
             << format_fixed(evaluate_dataset(slices), 6) << "  ("
             << slices.size() << " of " << pairs.size() << " sequences)\n";
    }
  }

  std::cout << report.str();
  if (!args.out.empty()) {
    write_text_file(args.out, report.str());
  }
  return 0;
}

int run_simulate(const SimulateArgs& args) {
  ExperimentSpec spec = load_experiment_spec(args.config);
  finalize_experiment_spec(spec);
  if (args.seed) spec.scenario.seed = *args.seed;
  if (args.trials) spec.trials = *args.trials;
  if (args.theta_eh) {
    for (auto& config : spec.configs) config.theta_eh = *args.theta_eh;
  }
  if (args.theta_det) {
    for (auto& config : spec.configs) config.theta_det = *args.theta_det;
  }
  finalize_experiment_spec(spec);

  const auto results = run_experiment(spec.scenario, spec.detector,
                                      spec.tracker, spec.configs, spec.trials,
                                      spec.metric);

  const std::filesystem::path out_dir(args.out);
  std::filesystem::create_directories(out_dir);
  write_text_file(out_dir / "results.csv", results_csv(results));
  write_text_file(out_dir / "trials.csv", trials_csv(results));
  write_text_file(out_dir / "config_resolved.json", resolved_config_json(spec));

  std::cout << results_table(results);
  std::cout << "wrote results.csv, trials.csv, config_resolved.json to "
            << out_dir.string() << "\n";
  return 0;
}

int run_check(const CheckArgs& args) {
  const bool all = args.target == "all";
  if (!all && args.target != "metric" && args.target != "edl" &&
      args.target != "rdm") {
    throw std::runtime_error("unknown check target \"" + args.target +
                             "\" (expected metric, edl, rdm, or all)");
  }

  std::vector<CheckReport> reports;
  if (all || args.target == "metric") {
    reports.push_back(check_metric(args.cases.value_or(10000),
                                   args.seed.value_or(1)));
  }
  if (all || args.target == "edl") {
    reports.push_back(check_edl(args.cases.value_or(10000),
                                args.seed ? *args.seed + 1 : 2));
  }
  if (all || args.target == "rdm") {
    reports.push_back(
        check_rdm(args.cases.value_or(1000), args.seed ? *args.seed + 2 : 3));
  }

  bool all_passed = true;
  for (const auto& report : reports) {
    std::cout << (report.passed() ? "[PASS] " : "[FAIL] ") << report.name
              << ": " << report.cases_run << " cases, " << report.failures
              << (report.failures == 1 ? " failure" : " failures") << "\n";
    for (const auto& message : report.messages) {
      std::cout << "       " << message << "\n";
    }
    all_passed = all_passed && report.passed();
  }
  return all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evidential detect-and-track toolkit: sequence scoring, "
               "synthetic experiments, and property checks"};
  app.require_subcommand(1);

  EvalArgs eval_args;
  auto* eval_cmd =
      app.add_subcommand("eval", "Score prediction files against annotations");
  eval_cmd->add_option("annotations", eval_args.annotations,
                       "Annotation file or directory")
      ->required();
  eval_cmd->add_option("predictions", eval_args.predictions,
                       "Prediction file or directory")
      ->required();
  eval_cmd->add_option("--alpha", eval_args.alpha, "Penalty weight")
      ->capture_default_str();
  eval_cmd->add_option("--beta", eval_args.beta, "Penalty exponent")
      ->capture_default_str();
  eval_cmd->add_option("--attribute", eval_args.attribute,
                       "Also report the slice tagged with this attribute");
  eval_cmd->add_option("--out", eval_args.out, "Also write the report here");

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Run seeded synthetic experiments from a config file");
  sim_cmd->add_option("--config", sim_args.config, "Experiment config (JSON)")
      ->required();
  sim_cmd->add_option("--out", sim_args.out, "Output directory")
      ->capture_default_str();
  sim_cmd->add_option("--trials", sim_args.trials, "Override the trial count");
  sim_cmd->add_option("--seed", sim_args.seed, "Override the base seed");
  sim_cmd->add_option("--theta-eh", sim_args.theta_eh,
                      "Override every config's uncertainty threshold");
  sim_cmd->add_option("--theta-det", sim_args.theta_det,
                      "Override every config's detection threshold");

  CheckArgs check_args;
  auto* check_cmd = app.add_subcommand(
      "check", "Run randomized property suites (metric, edl, rdm, all)");
  check_cmd->add_option("target", check_args.target, "Suite to run")
      ->required();
  check_cmd->add_option("--cases", check_args.cases,
                        "Case count per suite (defaults: 10000/10000/1000)");
  check_cmd->add_option("--seed", check_args.seed,
                        "Base seed (suites use seed, seed+1, seed+2)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (eval_cmd->parsed()) return run_eval(eval_args);
    if (sim_cmd->parsed()) return run_simulate(sim_args);
    if (check_cmd->parsed()) return run_check(check_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
