#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "evitrack/metric.hpp"
#include "evitrack/simulator.hpp"

namespace evitrack {

// Shortest decimal form that parses back to the same double; '.' separator
// regardless of locale.
std::string format_number(double value);

// Fixed-point with the given number of decimals; "-0.000000" is normalized
// to its unsigned form.
std::string format_fixed(double value, int places);

// One tracked sequence: a JSON header line, then one line per frame holding
// either a box [x, y, w, h], the bare marker `Not Exist`, or an object
// {"box": ..., "attributes": [...]} when a frame carries challenge tags.
struct SequenceAnnotations {
  std::string sequence_id;
  int frame_width = 0;
  int frame_height = 0;
  std::vector<FrameAnnotation> frames;
};

// Same shape minus sizes and attributes: header {"sequence": id}, then a box
// or `Not Exist` per frame.
struct SequencePredictions {
  std::string sequence_id;
  std::vector<FramePrediction> frames;
};

// Parsers throw std::runtime_error with "<source>:<line>: <what>" on
// malformed input and invariant violations. source_name is used only for
// messages.
SequenceAnnotations parse_annotations(const std::string& text,
                                      const std::string& source_name);
SequencePredictions parse_predictions(const std::string& text,
                                      const std::string& source_name);

// Canonical byte form: serialize(parse(text)) == text for canonical files.
std::string serialize_annotations(const SequenceAnnotations& sequence);
std::string serialize_predictions(const SequencePredictions& sequence);

SequenceAnnotations load_annotations(const std::filesystem::path& path);
SequencePredictions load_predictions(const std::filesystem::path& path);
void save_annotations(const SequenceAnnotations& sequence,
                      const std::filesystem::path& path);
void save_predictions(const SequencePredictions& sequence,
                      const std::filesystem::path& path);

struct EvalPair {
  SequenceAnnotations annotations;
  SequencePredictions predictions;
};

// Pairs annotation and prediction inputs: two files form one pair (ids must
// match), two directories pair files by name. Frame counts are checked here;
// mismatches name the sequence and both counts.
std::vector<EvalPair> load_eval_pairs(const std::filesystem::path& annotations,
                                      const std::filesystem::path& predictions);

// Everything one `simulate` run needs, as read from a config file.
struct ExperimentSpec {
  EvalConfig metric;
  int trials = 1;
  ScenarioSpec scenario;
  SimDetectorModel detector;
  SimTrackerModel tracker;
  std::vector<RunConfig> configs;  // defaults to EC, SC, DetOnly
};

// Strict JSON loader: unknown keys, wrong types, and invariant violations
// all fail with the offending field's dotted path.
ExperimentSpec parse_experiment_spec(const std::string& text,
                                     const std::string& source_name);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

// Fills in unset config names and re-applies validation; called once after
// CLI overrides are merged.
void finalize_experiment_spec(ExperimentSpec& spec);

// The exact spec a run used, serialized canonically for reproduction.
std::string resolved_config_json(const ExperimentSpec& spec);

// Result tables. CSV columns are fixed; numbers use format_fixed(6).
std::string results_csv(const std::vector<ConfigResult>& results);
std::string trials_csv(const std::vector<ConfigResult>& results);
std::string results_table(const std::vector<ConfigResult>& results);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace evitrack
