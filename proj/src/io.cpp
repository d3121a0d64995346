#include "evitrack/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "json.hpp"

namespace evitrack {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kAbsenceMarker = "Not Exist";

[[noreturn]] void fail(const std::string& source, const std::string& what) {
  throw std::runtime_error(source + ": " + what);
}

[[noreturn]] void fail_line(const std::string& source, std::size_t line,
                            const std::string& what) {
  throw std::runtime_error(source + ":" + std::to_string(line) + ": " + what);
}

std::string json_string(const std::string& s) {
  return nlohmann::json(s).dump();
}

// Splits on '\n', dropping one trailing '\r' per line. A final newline does
// not create an extra empty line.
std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    std::string line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = nl + 1;
  }
  return lines;
}

ordered_json parse_json_line(const std::string& line, const std::string& source,
                             std::size_t line_no) {
  try {
    return ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    fail_line(source, line_no, std::string("malformed JSON: ") + e.what());
  }
}

BoundingBox parse_box_array(const ordered_json& j, const std::string& source,
                            std::size_t line_no, std::size_t frame_index) {
  const std::string where = "frame " + std::to_string(frame_index) + ": ";
  if (!j.is_array() || j.size() != 4) {
    fail_line(source, line_no, where + "a box must be [x, y, w, h]");
  }
  double vals[4];
  for (std::size_t i = 0; i < 4; ++i) {
    if (!j[i].is_number()) {
      fail_line(source, line_no, where + "box entries must be numbers");
    }
    vals[i] = j[i].get<double>();
  }
  const BoundingBox box{vals[0], vals[1], vals[2], vals[3]};
  if (!box_is_valid(box)) {
    fail_line(source, line_no,
              where + "box must be finite with positive width and height");
  }
  return box;
}

std::set<Attribute> parse_attribute_array(const ordered_json& j,
                                          const std::string& source,
                                          std::size_t line_no,
                                          std::size_t frame_index) {
  const std::string where = "frame " + std::to_string(frame_index) + ": ";
  if (!j.is_array()) {
    fail_line(source, line_no, where + "\"attributes\" must be an array");
  }
  std::set<Attribute> attrs;
  for (const auto& item : j) {
    if (!item.is_string()) {
      fail_line(source, line_no, where + "attribute tags must be strings");
    }
    const auto tag = attribute_from_string(item.get<std::string>());
    if (!tag) {
      fail_line(source, line_no,
                where + "unknown attribute tag " + item.dump());
    }
    attrs.insert(*tag);
  }
  return attrs;
}

std::string box_to_line(const BoundingBox& box) {
  return "[" + format_number(box.x) + ", " + format_number(box.y) + ", " +
         format_number(box.w) + ", " + format_number(box.h) + "]";
}

// ---- experiment config machinery ----------------------------------------

std::string join_path(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

[[noreturn]] void fail_field(const std::string& source, const std::string& path,
                             const std::string& what) {
  throw std::runtime_error(source + ": " + path + ": " + what);
}

void expect_object(const ordered_json& j, const std::string& source,
                   const std::string& path) {
  if (!j.is_object()) fail_field(source, path, "expected an object");
}

void expect_known_keys(const ordered_json& obj, const std::string& source,
                       const std::string& path,
                       const std::vector<std::string>& allowed) {
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      fail_field(source, join_path(path, item.key()), "unknown field");
    }
  }
}

double get_number(const ordered_json& obj, const std::string& source,
                  const std::string& path, const std::string& key,
                  double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& j = obj.at(key);
  if (!j.is_number()) {
    fail_field(source, join_path(path, key), "expected a number");
  }
  return j.get<double>();
}

int get_integer(const ordered_json& obj, const std::string& source,
                const std::string& path, const std::string& key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& j = obj.at(key);
  if (!j.is_number_integer()) {
    fail_field(source, join_path(path, key), "expected an integer");
  }
  return j.get<int>();
}

std::uint64_t get_u64(const ordered_json& obj, const std::string& source,
                      const std::string& path, const std::string& key,
                      std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& j = obj.at(key);
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  fail_field(source, join_path(path, key), "expected a nonnegative integer");
}

bool get_boolean(const ordered_json& obj, const std::string& source,
                 const std::string& path, const std::string& key,
                 bool fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& j = obj.at(key);
  if (!j.is_boolean()) {
    fail_field(source, join_path(path, key), "expected true or false");
  }
  return j.get<bool>();
}

std::vector<double> get_number_array(const ordered_json& j,
                                     const std::string& source,
                                     const std::string& path,
                                     std::size_t expected_size) {
  if (!j.is_array() || j.size() != expected_size) {
    fail_field(source, path,
               "expected an array of " + std::to_string(expected_size) +
                   " numbers");
  }
  std::vector<double> out;
  out.reserve(expected_size);
  for (const auto& item : j) {
    if (!item.is_number()) fail_field(source, path, "entries must be numbers");
    out.push_back(item.get<double>());
  }
  return out;
}

ScoreLaw get_score_law(const ordered_json& obj, const std::string& source,
                       const std::string& path, const std::string& key,
                       const ScoreLaw& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto vals =
      get_number_array(obj.at(key), source, join_path(path, key), 2);
  return ScoreLaw{vals[0], vals[1]};
}

EvidenceLaw get_evidence_law(const ordered_json& obj, const std::string& source,
                             const std::string& path, const std::string& key,
                             const EvidenceLaw& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto vals =
      get_number_array(obj.at(key), source, join_path(path, key), 4);
  return EvidenceLaw{vals[0], vals[1], vals[2], vals[3]};
}

TrajectorySpec parse_trajectory(const ordered_json& j, const std::string& source,
                                const std::string& path) {
  expect_object(j, source, path);
  expect_known_keys(j, source, path,
                    {"box_width", "box_height", "speed", "turn_rate", "bounce",
                     "start_x", "start_y", "heading", "size_wobble",
                     "fast_bursts", "burst_jump"});
  TrajectorySpec tr;
  tr.box_width = get_number(j, source, path, "box_width", tr.box_width);
  tr.box_height = get_number(j, source, path, "box_height", tr.box_height);
  tr.speed = get_number(j, source, path, "speed", tr.speed);
  tr.turn_rate = get_number(j, source, path, "turn_rate", tr.turn_rate);
  tr.bounce = get_boolean(j, source, path, "bounce", tr.bounce);
  if (j.contains("start_x")) {
    tr.start_x = get_number(j, source, path, "start_x", 0.0);
  }
  if (j.contains("start_y")) {
    tr.start_y = get_number(j, source, path, "start_y", 0.0);
  }
  if (j.contains("heading")) {
    tr.heading = get_number(j, source, path, "heading", 0.0);
  }
  tr.size_wobble = get_number(j, source, path, "size_wobble", tr.size_wobble);
  tr.fast_bursts = get_integer(j, source, path, "fast_bursts", tr.fast_bursts);
  tr.burst_jump = get_number(j, source, path, "burst_jump", tr.burst_jump);
  return tr;
}

ScenarioSpec parse_scenario(const ordered_json& j, const std::string& source,
                            const std::string& path) {
  expect_object(j, source, path);
  expect_known_keys(j, source, path,
                    {"frame_width", "frame_height", "num_frames", "presence",
                     "trajectory", "num_distractors", "distractor_min_size",
                     "distractor_max_size", "seed"});
  ScenarioSpec spec;
  spec.frame_width = get_integer(j, source, path, "frame_width", spec.frame_width);
  spec.frame_height =
      get_integer(j, source, path, "frame_height", spec.frame_height);
  spec.num_frames = get_integer(j, source, path, "num_frames", spec.num_frames);
  if (j.contains("presence")) {
    const auto& presence = j.at("presence");
    const std::string presence_path = join_path(path, "presence");
    if (!presence.is_array()) {
      fail_field(source, presence_path, "expected an array of [start, end) pairs");
    }
    for (std::size_t i = 0; i < presence.size(); ++i) {
      const std::string item_path =
          presence_path + "[" + std::to_string(i) + "]";
      const auto& item = presence[i];
      if (!item.is_array() || item.size() != 2 ||
          !item[0].is_number_integer() || !item[1].is_number_integer()) {
        fail_field(source, item_path, "expected [start, end] integers");
      }
      spec.presence.push_back(
          PresenceInterval{item[0].get<int>(), item[1].get<int>()});
    }
  }
  if (j.contains("trajectory")) {
    spec.trajectory =
        parse_trajectory(j.at("trajectory"), source, join_path(path, "trajectory"));
  }
  spec.num_distractors =
      get_integer(j, source, path, "num_distractors", spec.num_distractors);
  spec.distractor_min_size = get_number(j, source, path, "distractor_min_size",
                                        spec.distractor_min_size);
  spec.distractor_max_size = get_number(j, source, path, "distractor_max_size",
                                        spec.distractor_max_size);
  spec.seed = get_u64(j, source, path, "seed", spec.seed);
  return spec;
}

SimDetectorModel parse_detector(const ordered_json& j, const std::string& source,
                                const std::string& path) {
  expect_object(j, source, path);
  expect_known_keys(j, source, path,
                    {"recall", "false_positive_rate", "localization_noise",
                     "true_score", "false_score"});
  SimDetectorModel model;
  model.recall = get_number(j, source, path, "recall", model.recall);
  model.false_positive_rate = get_number(j, source, path, "false_positive_rate",
                                         model.false_positive_rate);
  model.localization_noise = get_number(j, source, path, "localization_noise",
                                        model.localization_noise);
  model.true_score = get_score_law(j, source, path, "true_score", model.true_score);
  model.false_score =
      get_score_law(j, source, path, "false_score", model.false_score);
  return model;
}

SimTrackerModel parse_tracker(const ordered_json& j, const std::string& source,
                              const std::string& path) {
  expect_object(j, source, path);
  expect_known_keys(j, source, path,
                    {"per_frame_drift", "lock_loss_probability", "stale_drift",
                     "acquisition_iou", "confusion_rate", "on_target",
                     "off_target"});
  SimTrackerModel model;
  model.per_frame_drift =
      get_number(j, source, path, "per_frame_drift", model.per_frame_drift);
  model.lock_loss_probability = get_number(j, source, path,
                                           "lock_loss_probability",
                                           model.lock_loss_probability);
  model.stale_drift = get_number(j, source, path, "stale_drift", model.stale_drift);
  model.acquisition_iou =
      get_number(j, source, path, "acquisition_iou", model.acquisition_iou);
  model.confusion_rate =
      get_number(j, source, path, "confusion_rate", model.confusion_rate);
  model.on_target =
      get_evidence_law(j, source, path, "on_target", model.on_target);
  model.off_target =
      get_evidence_law(j, source, path, "off_target", model.off_target);
  return model;
}

std::vector<RunConfig> parse_configs(const ordered_json& j,
                                     const std::string& source,
                                     const std::string& path) {
  if (!j.is_array()) fail_field(source, path, "expected an array");
  std::vector<RunConfig> configs;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string item_path = path + "[" + std::to_string(i) + "]";
    const auto& item = j[i];
    expect_object(item, source, item_path);
    expect_known_keys(item, source, item_path,
                      {"name", "mode", "theta_eh", "theta_det"});
    RunConfig config;
    if (!item.contains("mode") || !item.at("mode").is_string()) {
      fail_field(source, join_path(item_path, "mode"),
                 "required: one of \"EC\", \"SC\", \"DetOnly\"");
    }
    const auto mode = run_mode_from_string(item.at("mode").get<std::string>());
    if (!mode) {
      fail_field(source, join_path(item_path, "mode"),
                 "must be one of \"EC\", \"SC\", \"DetOnly\"");
    }
    config.mode = *mode;
    if (item.contains("name")) {
      if (!item.at("name").is_string()) {
        fail_field(source, join_path(item_path, "name"), "expected a string");
      }
      config.name = item.at("name").get<std::string>();
    }
    config.theta_eh = get_number(item, source, item_path, "theta_eh",
                                 config.theta_eh);
    config.theta_det = get_number(item, source, item_path, "theta_det",
                                  config.theta_det);
    configs.push_back(std::move(config));
  }
  return configs;
}

void validate_spec_fields(const ExperimentSpec& spec, const std::string& source) {
  if (!std::isfinite(spec.metric.alpha) || spec.metric.alpha < 0.0) {
    fail_field(source, "metric.alpha", "must be finite and >= 0");
  }
  if (!std::isfinite(spec.metric.beta) || spec.metric.beta <= 0.0) {
    fail_field(source, "metric.beta", "must be finite and > 0");
  }
  if (spec.trials < 1) fail_field(source, "trials", "must be >= 1");
  try {
    validate_scenario_spec(spec.scenario);
  } catch (const std::invalid_argument& e) {
    fail_field(source, "scenario", e.what());
  }
  try {
    validate_detector_model(spec.detector);
  } catch (const std::invalid_argument& e) {
    fail_field(source, "detector", e.what());
  }
  try {
    validate_tracker_model(spec.tracker);
  } catch (const std::invalid_argument& e) {
    fail_field(source, "tracker", e.what());
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < spec.configs.size(); ++i) {
    const auto& config = spec.configs[i];
    const std::string item_path = "configs[" + std::to_string(i) + "]";
    if (!std::isfinite(config.theta_eh) || config.theta_eh < 0.0 ||
        config.theta_eh > 1.0) {
      fail_field(source, item_path + ".theta_eh", "must be in [0,1]");
    }
    if (!std::isfinite(config.theta_det) || config.theta_det < 0.0 ||
        config.theta_det > 1.0) {
      fail_field(source, item_path + ".theta_det", "must be in [0,1]");
    }
    if (!config.name.empty() && !names.insert(config.name).second) {
      fail_field(source, item_path + ".name",
                 "duplicate config name \"" + config.name + "\"");
    }
  }
}

ordered_json trajectory_to_json(const TrajectorySpec& tr) {
  ordered_json j;
  j["box_width"] = tr.box_width;
  j["box_height"] = tr.box_height;
  j["speed"] = tr.speed;
  j["turn_rate"] = tr.turn_rate;
  j["bounce"] = tr.bounce;
  if (tr.start_x) j["start_x"] = *tr.start_x;
  if (tr.start_y) j["start_y"] = *tr.start_y;
  if (tr.heading) j["heading"] = *tr.heading;
  j["size_wobble"] = tr.size_wobble;
  j["fast_bursts"] = tr.fast_bursts;
  j["burst_jump"] = tr.burst_jump;
  return j;
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string format_fixed(double value, int places) {
  char buf[96];
  const auto res =
      std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed,
                    places);
  std::string s(buf, res.ptr);
  if (!s.empty() && s[0] == '-' &&
      s.find_first_not_of("0.", 1) == std::string::npos) {
    s.erase(0, 1);  // -0.000000 reads as a distinct value; it is not
  }
  return s;
}

SequenceAnnotations parse_annotations(const std::string& text,
                                      const std::string& source_name) {
  const auto lines = split_lines(text);
  if (lines.empty()) fail(source_name, "no sequences");

  const ordered_json header = parse_json_line(lines[0], source_name, 1);
  if (!header.is_object()) {
    fail_line(source_name, 1, "expected a header object");
  }
  expect_known_keys(header, source_name, "header",
                    {"sequence", "frame_width", "frame_height"});
  if (!header.contains("sequence") || !header.at("sequence").is_string()) {
    fail_line(source_name, 1, "header needs a \"sequence\" string");
  }
  if (!header.contains("frame_width") ||
      !header.at("frame_width").is_number_integer() ||
      !header.contains("frame_height") ||
      !header.at("frame_height").is_number_integer()) {
    fail_line(source_name, 1,
              "header needs integer \"frame_width\" and \"frame_height\"");
  }

  SequenceAnnotations seq;
  seq.sequence_id = header.at("sequence").get<std::string>();
  seq.frame_width = header.at("frame_width").get<int>();
  seq.frame_height = header.at("frame_height").get<int>();
  if (seq.frame_width < 1 || seq.frame_height < 1) {
    fail_line(source_name, 1, "frame size must be positive");
  }

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const std::size_t frame_index = i - 1;
    const std::string& line = lines[i];
    FrameAnnotation ann;
    if (line == kAbsenceMarker) {
      // stays invisible
    } else if (!line.empty() && line[0] == '[') {
      const ordered_json j = parse_json_line(line, source_name, line_no);
      ann.visible = true;
      ann.box = parse_box_array(j, source_name, line_no, frame_index);
    } else if (!line.empty() && line[0] == '{') {
      const ordered_json j = parse_json_line(line, source_name, line_no);
      expect_known_keys(j, source_name,
                        "frame " + std::to_string(frame_index),
                        {"box", "attributes"});
      if (!j.contains("box")) {
        fail_line(source_name, line_no,
                  "frame " + std::to_string(frame_index) +
                      ": object form needs a \"box\"");
      }
      const auto& box = j.at("box");
      if (box.is_string()) {
        if (box.get<std::string>() != kAbsenceMarker) {
          fail_line(source_name, line_no,
                    "frame " + std::to_string(frame_index) +
                        ": a box string can only be \"Not Exist\"");
        }
      } else {
        ann.visible = true;
        ann.box = parse_box_array(box, source_name, line_no, frame_index);
      }
      if (j.contains("attributes")) {
        ann.attributes = parse_attribute_array(j.at("attributes"), source_name,
                                               line_no, frame_index);
      }
    } else {
      fail_line(source_name, line_no,
                "frame " + std::to_string(frame_index) +
                    ": expected a box, \"Not Exist\", or an object");
    }
    seq.frames.push_back(std::move(ann));
  }
  if (seq.frames.empty()) fail(source_name, "sequence has no frames");
  return seq;
}

SequencePredictions parse_predictions(const std::string& text,
                                      const std::string& source_name) {
  const auto lines = split_lines(text);
  if (lines.empty()) fail(source_name, "no sequences");

  const ordered_json header = parse_json_line(lines[0], source_name, 1);
  if (!header.is_object()) {
    fail_line(source_name, 1, "expected a header object");
  }
  expect_known_keys(header, source_name, "header", {"sequence"});
  if (!header.contains("sequence") || !header.at("sequence").is_string()) {
    fail_line(source_name, 1, "header needs a \"sequence\" string");
  }

  SequencePredictions seq;
  seq.sequence_id = header.at("sequence").get<std::string>();
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const std::size_t frame_index = i - 1;
    const std::string& line = lines[i];
    FramePrediction pred;
    if (line == kAbsenceMarker) {
      // absent
    } else if (!line.empty() && line[0] == '[') {
      const ordered_json j = parse_json_line(line, source_name, line_no);
      pred.box = parse_box_array(j, source_name, line_no, frame_index);
    } else {
      fail_line(source_name, line_no,
                "frame " + std::to_string(frame_index) +
                    ": expected a box or \"Not Exist\"");
    }
    seq.frames.push_back(pred);
  }
  if (seq.frames.empty()) fail(source_name, "sequence has no frames");
  return seq;
}

std::string serialize_annotations(const SequenceAnnotations& sequence) {
  std::string out = "{\"sequence\": " + json_string(sequence.sequence_id) +
                    ", \"frame_width\": " + std::to_string(sequence.frame_width) +
                    ", \"frame_height\": " +
                    std::to_string(sequence.frame_height) + "}\n";
  for (const auto& ann : sequence.frames) {
    if (ann.attributes.empty()) {
      out += ann.visible ? box_to_line(*ann.box) : kAbsenceMarker;
    } else {
      out += "{\"box\": ";
      if (ann.visible) {
        out += box_to_line(*ann.box);
      } else {
        out += "\"";
        out += kAbsenceMarker;
        out += "\"";
      }
      out += ", \"attributes\": [";
      bool first = true;
      for (const Attribute a : ann.attributes) {
        if (!first) out += ", ";
        out += "\"";
        out += to_string(a);
        out += "\"";
        first = false;
      }
      out += "]}";
    }
    out += "\n";
  }
  return out;
}

std::string serialize_predictions(const SequencePredictions& sequence) {
  std::string out =
      "{\"sequence\": " + json_string(sequence.sequence_id) + "}\n";
  for (const auto& pred : sequence.frames) {
    out += pred.box ? box_to_line(*pred.box) : kAbsenceMarker;
    out += "\n";
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write file: " + path.string());
  }
  out << text;
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

SequenceAnnotations load_annotations(const std::filesystem::path& path) {
  return parse_annotations(read_text_file(path), path.string());
}

SequencePredictions load_predictions(const std::filesystem::path& path) {
  return parse_predictions(read_text_file(path), path.string());
}

void save_annotations(const SequenceAnnotations& sequence,
                      const std::filesystem::path& path) {
  write_text_file(path, serialize_annotations(sequence));
}

void save_predictions(const SequencePredictions& sequence,
                      const std::filesystem::path& path) {
  write_text_file(path, serialize_predictions(sequence));
}

std::vector<EvalPair> load_eval_pairs(const std::filesystem::path& annotations,
                                      const std::filesystem::path& predictions) {
  namespace fs = std::filesystem;
  const auto check_pair = [](EvalPair pair) {
    if (pair.annotations.sequence_id != pair.predictions.sequence_id) {
      throw std::runtime_error("sequence id mismatch: \"" +
                               pair.annotations.sequence_id + "\" vs \"" +
                               pair.predictions.sequence_id + "\"");
    }
    if (pair.annotations.frames.size() != pair.predictions.frames.size()) {
      throw std::runtime_error(
          "sequence \"" + pair.annotations.sequence_id + "\": " +
          std::to_string(pair.annotations.frames.size()) +
          " annotation frames vs " +
          std::to_string(pair.predictions.frames.size()) +
          " prediction frames");
    }
    return pair;
  };

  if (fs::is_regular_file(annotations) && fs::is_regular_file(predictions)) {
    return {check_pair(
        EvalPair{load_annotations(annotations), load_predictions(predictions)})};
  }
  if (fs::is_directory(annotations) && fs::is_directory(predictions)) {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(annotations)) {
      if (!entry.is_regular_file()) continue;
      const std::string name = entry.path().filename().string();
      if (!name.empty() && name[0] != '.') names.push_back(name);
    }
    std::sort(names.begin(), names.end());
    if (names.empty()) {
      throw std::runtime_error(annotations.string() + ": no sequences");
    }
    std::set<std::string> expected(names.begin(), names.end());
    for (const auto& entry : fs::directory_iterator(predictions)) {
      if (!entry.is_regular_file()) continue;
      const std::string name = entry.path().filename().string();
      if (!name.empty() && name[0] != '.' && expected.count(name) == 0) {
        throw std::runtime_error("prediction file " +
                                 (predictions / name).string() +
                                 " has no matching annotation file");
      }
    }
    std::vector<EvalPair> pairs;
    pairs.reserve(names.size());
    for (const auto& name : names) {
      const fs::path pred_path = predictions / name;
      if (!fs::is_regular_file(pred_path)) {
        throw std::runtime_error("missing prediction file: " +
                                 pred_path.string());
      }
      pairs.push_back(check_pair(EvalPair{load_annotations(annotations / name),
                                          load_predictions(pred_path)}));
    }
    return pairs;
  }
  throw std::runtime_error(
      "annotations and predictions must both be files or both be directories");
}

ExperimentSpec parse_experiment_spec(const std::string& text,
                                     const std::string& source_name) {
  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(source_name, std::string("malformed JSON: ") + e.what());
  }
  expect_object(root, source_name, "(root)");
  expect_known_keys(root, source_name, "",
                    {"metric", "trials", "scenario", "detector", "tracker",
                     "configs"});

  ExperimentSpec spec;
  if (root.contains("metric")) {
    const auto& metric = root.at("metric");
    expect_object(metric, source_name, "metric");
    expect_known_keys(metric, source_name, "metric", {"alpha", "beta"});
    spec.metric.alpha =
        get_number(metric, source_name, "metric", "alpha", spec.metric.alpha);
    spec.metric.beta =
        get_number(metric, source_name, "metric", "beta", spec.metric.beta);
  }
  spec.trials = get_integer(root, source_name, "", "trials", spec.trials);
  if (root.contains("scenario")) {
    spec.scenario = parse_scenario(root.at("scenario"), source_name, "scenario");
  }
  if (root.contains("detector")) {
    spec.detector = parse_detector(root.at("detector"), source_name, "detector");
  }
  if (root.contains("tracker")) {
    spec.tracker = parse_tracker(root.at("tracker"), source_name, "tracker");
  }
  if (root.contains("configs")) {
    spec.configs = parse_configs(root.at("configs"), source_name, "configs");
  }
  validate_spec_fields(spec, source_name);
  return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  return parse_experiment_spec(read_text_file(path), path.string());
}

void finalize_experiment_spec(ExperimentSpec& spec) {
  if (spec.configs.empty()) {
    spec.configs = {RunConfig{"", RunMode::EvidentialCombination, 0.2, 0.5},
                    RunConfig{"", RunMode::SimpleCombination, 0.2, 0.5},
                    RunConfig{"", RunMode::DetectionOnly, 0.2, 0.5}};
  }
  for (auto& config : spec.configs) {
    if (config.name.empty()) config.name = to_string(config.mode);
  }
  validate_spec_fields(spec, "config");
}

std::string resolved_config_json(const ExperimentSpec& spec) {
  ordered_json j;
  j["metric"] = {{"alpha", spec.metric.alpha}, {"beta", spec.metric.beta}};
  j["trials"] = spec.trials;

  ordered_json scenario;
  scenario["frame_width"] = spec.scenario.frame_width;
  scenario["frame_height"] = spec.scenario.frame_height;
  scenario["num_frames"] = spec.scenario.num_frames;
  ordered_json presence = ordered_json::array();
  for (const auto& interval : spec.scenario.presence) {
    presence.push_back({interval.start, interval.end});
  }
  scenario["presence"] = presence;
  scenario["trajectory"] = trajectory_to_json(spec.scenario.trajectory);
  scenario["num_distractors"] = spec.scenario.num_distractors;
  scenario["distractor_min_size"] = spec.scenario.distractor_min_size;
  scenario["distractor_max_size"] = spec.scenario.distractor_max_size;
  scenario["seed"] = spec.scenario.seed;
  j["scenario"] = scenario;

  ordered_json detector;
  detector["recall"] = spec.detector.recall;
  detector["false_positive_rate"] = spec.detector.false_positive_rate;
  detector["localization_noise"] = spec.detector.localization_noise;
  detector["true_score"] = {spec.detector.true_score.lo,
                            spec.detector.true_score.hi};
  detector["false_score"] = {spec.detector.false_score.lo,
                             spec.detector.false_score.hi};
  j["detector"] = detector;

  ordered_json tracker;
  tracker["per_frame_drift"] = spec.tracker.per_frame_drift;
  tracker["lock_loss_probability"] = spec.tracker.lock_loss_probability;
  tracker["stale_drift"] = spec.tracker.stale_drift;
  tracker["acquisition_iou"] = spec.tracker.acquisition_iou;
  tracker["confusion_rate"] = spec.tracker.confusion_rate;
  tracker["on_target"] = {spec.tracker.on_target.target_lo,
                          spec.tracker.on_target.target_hi,
                          spec.tracker.on_target.background_lo,
                          spec.tracker.on_target.background_hi};
  tracker["off_target"] = {spec.tracker.off_target.target_lo,
                           spec.tracker.off_target.target_hi,
                           spec.tracker.off_target.background_lo,
                           spec.tracker.off_target.background_hi};
  j["tracker"] = tracker;

  ordered_json configs = ordered_json::array();
  for (const auto& config : spec.configs) {
    ordered_json item;
    item["name"] = config.name;
    item["mode"] = to_string(config.mode);
    item["theta_eh"] = config.theta_eh;
    item["theta_det"] = config.theta_det;
    configs.push_back(item);
  }
  j["configs"] = configs;
  return j.dump(2) + "\n";
}

std::string results_csv(const std::vector<ConfigResult>& results) {
  std::string out =
      "config,mode,theta_eh,theta_det,trials,mean_acc,std_acc,std_error\n";
  for (const auto& r : results) {
    out += r.config.name;
    out += ",";
    out += to_string(r.config.mode);
    out += ",";
    out += format_fixed(r.config.theta_eh, 6) + "," +
           format_fixed(r.config.theta_det, 6) + "," +
           std::to_string(r.trial_acc.size()) + "," +
           format_fixed(r.mean_acc, 6) + "," + format_fixed(r.std_acc, 6) +
           "," + format_fixed(r.std_error, 6) + "\n";
  }
  return out;
}

std::string trials_csv(const std::vector<ConfigResult>& results) {
  std::string out = "config,trial,acc\n";
  for (const auto& r : results) {
    for (std::size_t t = 0; t < r.trial_acc.size(); ++t) {
      out += r.config.name + "," + std::to_string(t) + "," +
             format_fixed(r.trial_acc[t], 6) + "\n";
    }
  }
  return out;
}

std::string results_table(const std::vector<ConfigResult>& results) {
  std::size_t name_width = 6;
  for (const auto& r : results) {
    name_width = std::max(name_width, r.config.name.size());
  }
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(name_width) + 2) << "config"
      << std::right << std::setw(9) << "theta_eh" << std::setw(11)
      << "theta_det" << std::setw(10) << "mean_acc" << std::setw(10)
      << "std_acc" << std::setw(11) << "std_error" << "\n";
  for (const auto& r : results) {
    out << std::left << std::setw(static_cast<int>(name_width) + 2)
        << r.config.name << std::right << std::setw(9)
        << format_fixed(r.config.theta_eh, 3) << std::setw(11)
        << format_fixed(r.config.theta_det, 3) << std::setw(10)
        << format_fixed(r.mean_acc, 6) << std::setw(10)
        << format_fixed(r.std_acc, 6) << std::setw(11)
        << format_fixed(r.std_error, 6) << "\n";
  }
  return out.str();
}

}  // namespace evitrack
