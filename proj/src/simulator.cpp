#include "evitrack/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

namespace evitrack {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Per-purpose RNG stream tags. Appending new tags keeps existing draws
// stable; reordering or renumbering breaks recorded results.
enum SimStream : std::uint64_t {
  kTrajectoryInit = 11,
  kTrajectoryStep = 12,  // keyed by frame index
  kBurstFrames = 13,
  kDistractors = 14,
  kDetectorFrame = 15,  // keyed by frame index
  kTrackerFrame = 16,   // keyed by frame index
  kTrial = 17,          // keyed by trial index
};

void check_probability(double p, const char* name) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
    throw std::invalid_argument(std::string(name) + " must be in [0,1]");
  }
}

void check_nonnegative(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) {
    throw std::invalid_argument(std::string(name) + " must be finite and >= 0");
  }
}

void check_score_law(const ScoreLaw& law, const char* name) {
  if (!std::isfinite(law.lo) || !std::isfinite(law.hi) || law.lo < 0.0 ||
      law.hi > 1.0 || law.lo > law.hi) {
    throw std::invalid_argument(std::string(name) +
                                " must satisfy 0 <= lo <= hi <= 1");
  }
}

void check_evidence_law(const EvidenceLaw& law, const char* name) {
  const double vals[4] = {law.target_lo, law.target_hi, law.background_lo,
                          law.background_hi};
  for (double v : vals) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument(std::string(name) +
                                  " bounds must be finite and >= 0");
    }
  }
  if (law.target_lo > law.target_hi || law.background_lo > law.background_hi) {
    throw std::invalid_argument(std::string(name) + " bounds must satisfy lo <= hi");
  }
}

// Folds v into [lo, hi] by reflecting at the ends, like a ray bouncing
// between two mirrors.
double reflect(double v, double lo, double hi) {
  const double span = hi - lo;
  if (span <= 0.0) return lo;
  const double period = 2.0 * span;
  double t = std::fmod(v - lo, period);
  if (t < 0.0) t += period;
  return t <= span ? lo + t : hi - (t - span);
}

bool frame_is_visible(const std::vector<PresenceInterval>& presence, int frame) {
  for (const auto& interval : presence) {
    if (frame >= interval.start && frame < interval.end) return true;
  }
  return false;
}

DirichletEvidence draw_evidence(const EvidenceLaw& law, Rng& rng) {
  const double e_target = rng.uniform(law.target_lo, law.target_hi);
  const double e_background = rng.uniform(law.background_lo, law.background_hi);
  return DirichletEvidence({e_target, e_background});
}

}  // namespace

void validate_scenario_spec(const ScenarioSpec& spec) {
  if (spec.frame_width < 2 || spec.frame_height < 2) {
    throw std::invalid_argument("ScenarioSpec: frame size too small");
  }
  if (spec.num_frames < 1) {
    throw std::invalid_argument("ScenarioSpec: num_frames must be >= 1");
  }
  std::vector<PresenceInterval> sorted = spec.presence;
  std::sort(sorted.begin(), sorted.end(),
            [](const PresenceInterval& a, const PresenceInterval& b) {
              return a.start < b.start;
            });
  int prev_end = 0;
  bool first = true;
  for (const auto& interval : sorted) {
    if (interval.start < 0 || interval.end > spec.num_frames ||
        interval.start >= interval.end) {
      throw std::invalid_argument(
          "ScenarioSpec: presence interval [" + std::to_string(interval.start) +
          ", " + std::to_string(interval.end) + ") outside [0, " +
          std::to_string(spec.num_frames) + ") or empty");
    }
    if (!first && interval.start < prev_end) {
      throw std::invalid_argument("ScenarioSpec: presence intervals overlap");
    }
    prev_end = interval.end;
    first = false;
  }

  const TrajectorySpec& tr = spec.trajectory;
  if (!std::isfinite(tr.box_width) || !std::isfinite(tr.box_height) ||
      tr.box_width <= 0.0 || tr.box_height <= 0.0) {
    throw std::invalid_argument("TrajectorySpec: box size must be positive");
  }
  check_nonnegative(tr.speed, "TrajectorySpec: speed");
  check_nonnegative(tr.turn_rate, "TrajectorySpec: turn_rate");
  check_nonnegative(tr.burst_jump, "TrajectorySpec: burst_jump");
  if (!std::isfinite(tr.size_wobble) || tr.size_wobble < 0.0 ||
      tr.size_wobble > 0.9) {
    throw std::invalid_argument("TrajectorySpec: size_wobble must be in [0, 0.9]");
  }
  if (tr.fast_bursts < 0 || tr.fast_bursts >= spec.num_frames) {
    throw std::invalid_argument(
        "TrajectorySpec: fast_bursts must be in [0, num_frames)");
  }
  const double max_w = tr.box_width * (1.0 + tr.size_wobble);
  const double max_h = tr.box_height * (1.0 + tr.size_wobble);
  if (max_w >= spec.frame_width || max_h >= spec.frame_height) {
    throw std::invalid_argument(
        "TrajectorySpec: box (with wobble) does not fit in the frame");
  }

  if (spec.num_distractors < 0) {
    throw std::invalid_argument("ScenarioSpec: num_distractors must be >= 0");
  }
  if (spec.num_distractors > 0) {
    if (!std::isfinite(spec.distractor_min_size) ||
        !std::isfinite(spec.distractor_max_size) ||
        spec.distractor_min_size <= 0.0 ||
        spec.distractor_min_size > spec.distractor_max_size ||
        spec.distractor_max_size >= spec.frame_width ||
        spec.distractor_max_size >= spec.frame_height) {
      throw std::invalid_argument(
          "ScenarioSpec: distractor sizes must satisfy 0 < min <= max < frame");
    }
  }
}

Scenario generate_scenario(const ScenarioSpec& spec) {
  validate_scenario_spec(spec);
  const TrajectorySpec& tr = spec.trajectory;

  // Start state. Draw order: center x, center y, heading.
  Rng init_rng = derive_stream(spec.seed, kTrajectoryInit);
  const double half_w_max = tr.box_width * (1.0 + tr.size_wobble) / 2.0;
  const double half_h_max = tr.box_height * (1.0 + tr.size_wobble) / 2.0;
  double cx = tr.start_x
                  ? *tr.start_x
                  : init_rng.uniform(half_w_max, spec.frame_width - half_w_max);
  double cy = tr.start_y
                  ? *tr.start_y
                  : init_rng.uniform(half_h_max, spec.frame_height - half_h_max);
  double heading = tr.heading ? *tr.heading : init_rng.uniform(0.0, 2.0 * kPi);

  // Burst frames: sampled without replacement from [1, num_frames).
  std::set<int> burst_frames;
  if (tr.fast_bursts > 0) {
    Rng burst_rng = derive_stream(spec.seed, kBurstFrames);
    while (static_cast<int>(burst_frames.size()) < tr.fast_bursts) {
      burst_frames.insert(
          static_cast<int>(burst_rng.uniform_int(1, spec.num_frames - 1)));
    }
  }

  // Static decoys. Draw order per distractor: w, h, x, y.
  std::vector<BoundingBox> distractors;
  if (spec.num_distractors > 0) {
    Rng distractor_rng = derive_stream(spec.seed, kDistractors);
    distractors.reserve(static_cast<std::size_t>(spec.num_distractors));
    for (int i = 0; i < spec.num_distractors; ++i) {
      const double w = distractor_rng.uniform(spec.distractor_min_size,
                                              spec.distractor_max_size);
      const double h = distractor_rng.uniform(spec.distractor_min_size,
                                              spec.distractor_max_size);
      const double x = distractor_rng.uniform(0.0, spec.frame_width - w);
      const double y = distractor_rng.uniform(0.0, spec.frame_height - h);
      distractors.push_back(BoundingBox{x, y, w, h});
    }
  }

  Scenario scenario;
  scenario.frames.reserve(static_cast<std::size_t>(spec.num_frames));
  scenario.annotations.reserve(static_cast<std::size_t>(spec.num_frames));

  for (int k = 0; k < spec.num_frames; ++k) {
    // Per-frame draw order: heading turn (frames >= 1), width wobble,
    // height wobble.
    Rng frame_rng = derive_stream(spec.seed, kTrajectoryStep,
                                  static_cast<std::uint64_t>(k));
    if (k > 0) {
      heading += frame_rng.uniform(-tr.turn_rate, tr.turn_rate);
      const double step =
          burst_frames.count(k) > 0 ? tr.burst_jump : tr.speed;
      cx += step * std::cos(heading);
      cy += step * std::sin(heading);
    }
    const double fw = 1.0 + (tr.size_wobble > 0.0
                                 ? frame_rng.uniform(-tr.size_wobble, tr.size_wobble)
                                 : 0.0);
    const double fh = 1.0 + (tr.size_wobble > 0.0
                                 ? frame_rng.uniform(-tr.size_wobble, tr.size_wobble)
                                 : 0.0);
    const double w = tr.box_width * fw;
    const double h = tr.box_height * fh;
    const double lo_x = w / 2.0;
    const double hi_x = spec.frame_width - w / 2.0;
    const double lo_y = h / 2.0;
    const double hi_y = spec.frame_height - h / 2.0;
    if (tr.bounce) {
      cx = reflect(cx, lo_x, hi_x);
      cy = reflect(cy, lo_y, hi_y);
    } else if (cx < lo_x || cx > hi_x || cy < lo_y || cy > hi_y) {
      throw std::invalid_argument("ScenarioSpec: trajectory exits the frame at frame " +
                                  std::to_string(k) +
                                  " (set bounce or adjust speed/start)");
    }
    const BoundingBox box{cx - w / 2.0, cy - h / 2.0, w, h};

    FrameState frame;
    frame.index = k;
    frame.frame_width = spec.frame_width;
    frame.frame_height = spec.frame_height;
    frame.distractors = distractors;

    FrameAnnotation ann;
    if (frame_is_visible(spec.presence, k)) {
      frame.target = box;
      ann.visible = true;
      ann.box = box;
    }
    scenario.frames.push_back(std::move(frame));
    scenario.annotations.push_back(std::move(ann));
  }
  return scenario;
}

void validate_detector_model(const SimDetectorModel& model) {
  check_probability(model.recall, "SimDetectorModel: recall");
  check_probability(model.false_positive_rate,
                    "SimDetectorModel: false_positive_rate");
  check_nonnegative(model.localization_noise,
                    "SimDetectorModel: localization_noise");
  check_score_law(model.true_score, "SimDetectorModel: true_score");
  check_score_law(model.false_score, "SimDetectorModel: false_score");
}

void validate_tracker_model(const SimTrackerModel& model) {
  check_nonnegative(model.per_frame_drift, "SimTrackerModel: per_frame_drift");
  check_probability(model.lock_loss_probability,
                    "SimTrackerModel: lock_loss_probability");
  check_nonnegative(model.stale_drift, "SimTrackerModel: stale_drift");
  check_probability(model.acquisition_iou, "SimTrackerModel: acquisition_iou");
  check_probability(model.confusion_rate, "SimTrackerModel: confusion_rate");
  check_evidence_law(model.on_target, "SimTrackerModel: on_target");
  check_evidence_law(model.off_target, "SimTrackerModel: off_target");
}

BoundingBox jitter_box(const BoundingBox& box, double sigma_pos,
                       double sigma_size, Rng& rng) {
  // Fixed draw order: dx, dy, dw, dh.
  const double dx = rng.normal(0.0, sigma_pos);
  const double dy = rng.normal(0.0, sigma_pos);
  const double dw = rng.normal(0.0, sigma_size);
  const double dh = rng.normal(0.0, sigma_size);
  return BoundingBox{box.x + dx, box.y + dy, std::max(1.0, box.w + dw),
                     std::max(1.0, box.h + dh)};
}

std::vector<Detection> simulate_detector(const SimDetectorModel& model,
                                         const FrameState& frame,
                                         const FrameAnnotation& annotation,
                                         Rng& rng) {
  std::vector<Detection> detections;
  if (annotation.visible && rng.bernoulli(model.recall)) {
    const BoundingBox box =
        jitter_box(*annotation.box, model.localization_noise,
                   model.localization_noise / 2.0, rng);
    const double score = rng.uniform(model.true_score.lo, model.true_score.hi);
    detections.push_back(Detection{box, score});
  }
  for (const auto& decoy : frame.distractors) {
    if (rng.bernoulli(model.false_positive_rate)) {
      const BoundingBox box = jitter_box(decoy, model.localization_noise,
                                         model.localization_noise / 2.0, rng);
      const double score =
          rng.uniform(model.false_score.lo, model.false_score.hi);
      detections.push_back(Detection{box, score});
    }
  }
  return detections;
}

void acquire_lock(const SimTrackerModel& model, const TemplateInfo& tmpl,
                  const FrameAnnotation& template_frame_truth,
                  TrackerLockState& lock) {
  lock.initialized = true;
  lock.template_frame = tmpl.frame_index;
  lock.stale_box = tmpl.box;
  lock.locked = template_frame_truth.visible &&
                iou(tmpl.box, *template_frame_truth.box) >= model.acquisition_iou;
}

TrackOutput simulate_tracker(const SimTrackerModel& model,
                             const TemplateInfo& tmpl,
                             [[maybe_unused]] const FrameState& frame,
                             const FrameAnnotation& annotation,
                             TrackerLockState& lock, Rng& rng) {
  if (!lock.initialized || lock.template_frame != tmpl.frame_index) {
    throw std::logic_error("simulate_tracker: lock state not acquired for this template");
  }
  if (lock.locked && rng.bernoulli(model.lock_loss_probability)) {
    lock.locked = false;
  }
  bool on_target = false;
  if (lock.locked) {
    if (annotation.visible) {
      on_target = true;
    } else {
      // The target left the view; the lock cannot survive that.
      lock.locked = false;
    }
  }

  BoundingBox out;
  if (on_target) {
    out = jitter_box(*annotation.box, model.per_frame_drift,
                     model.per_frame_drift / 4.0, rng);
    lock.stale_box = out;
  } else {
    lock.stale_box = jitter_box(lock.stale_box, model.stale_drift,
                                model.stale_drift / 4.0, rng);
    out = lock.stale_box;
  }

  bool report_on_target = on_target;
  if (rng.bernoulli(model.confusion_rate)) report_on_target = !report_on_target;
  const EvidenceLaw& law = report_on_target ? model.on_target : model.off_target;
  return TrackOutput{out, draw_evidence(law, rng)};
}

SimDetector::SimDetector(const SimDetectorModel& model, std::uint64_t seed)
    : model_(model), seed_(seed) {
  validate_detector_model(model_);
}

std::vector<Detection> SimDetector::detect(const FrameState& frame) {
  FrameAnnotation truth;
  truth.visible = frame.target.has_value();
  truth.box = frame.target;
  Rng rng = derive_stream(seed_, kDetectorFrame,
                          static_cast<std::uint64_t>(frame.index));
  return simulate_detector(model_, frame, truth, rng);
}

SimTracker::SimTracker(const SimTrackerModel& model,
                       std::vector<FrameAnnotation> annotations,
                       std::uint64_t seed)
    : model_(model), annotations_(std::move(annotations)), seed_(seed) {
  validate_tracker_model(model_);
  if (annotations_.empty()) {
    throw std::invalid_argument("SimTracker: empty annotation list");
  }
}

TrackOutput SimTracker::track(const TemplateInfo& tmpl, const FrameState& frame) {
  const auto in_range = [this](int index) {
    return index >= 0 && index < static_cast<int>(annotations_.size());
  };
  if (!in_range(tmpl.frame_index) || !in_range(frame.index)) {
    throw std::invalid_argument("SimTracker: frame index outside the scenario");
  }
  if (!lock_.initialized || lock_.template_frame != tmpl.frame_index) {
    acquire_lock(model_, tmpl,
                 annotations_[static_cast<std::size_t>(tmpl.frame_index)], lock_);
  }
  Rng rng = derive_stream(seed_, kTrackerFrame,
                          static_cast<std::uint64_t>(frame.index));
  return simulate_tracker(model_, tmpl, frame,
                          annotations_[static_cast<std::size_t>(frame.index)],
                          lock_, rng);
}

const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::EvidentialCombination: return "EC";
    case RunMode::SimpleCombination: return "SC";
    case RunMode::DetectionOnly: return "DetOnly";
  }
  throw std::invalid_argument("unknown run mode value");
}

std::optional<RunMode> run_mode_from_string(const std::string& name) {
  if (name == "EC") return RunMode::EvidentialCombination;
  if (name == "SC") return RunMode::SimpleCombination;
  if (name == "DetOnly") return RunMode::DetectionOnly;
  return std::nullopt;
}

std::vector<ConfigResult> run_experiment(const ScenarioSpec& spec,
                                         const SimDetectorModel& detector_model,
                                         const SimTrackerModel& tracker_model,
                                         const std::vector<RunConfig>& configs,
                                         int trials, const EvalConfig& metric) {
  validate_scenario_spec(spec);
  validate_detector_model(detector_model);
  validate_tracker_model(tracker_model);
  if (configs.empty()) {
    throw std::invalid_argument("run_experiment: no configs");
  }
  if (trials < 1) {
    throw std::invalid_argument("run_experiment: trials must be >= 1");
  }

  std::vector<ConfigResult> results;
  results.reserve(configs.size());
  for (const auto& config : configs) {
    ConfigResult r;
    r.config = config;
    r.trial_acc.reserve(static_cast<std::size_t>(trials));
    results.push_back(std::move(r));
  }

  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t trial_seed =
        mix_keys(spec.seed, kTrial, static_cast<std::uint64_t>(trial));
    ScenarioSpec trial_spec = spec;
    trial_spec.seed = trial_seed;
    const Scenario scenario = generate_scenario(trial_spec);

    for (std::size_t c = 0; c < configs.size(); ++c) {
      // Fresh ports per (trial, config): identical noise streams, so the
      // configs differ only in how they use the same detector and tracker.
      SimDetector detector(detector_model, trial_seed);
      SimTracker tracker(tracker_model, scenario.annotations, trial_seed);

      std::vector<FramePrediction> predictions;
      switch (configs[c].mode) {
        case RunMode::EvidentialCombination:
          predictions = run_sequence(scenario.frames, detector, tracker,
                                     configs[c].theta_eh, configs[c].theta_det);
          break;
        case RunMode::SimpleCombination:
          predictions = run_simple_combination(scenario.frames, detector,
                                               tracker, configs[c].theta_det);
          break;
        case RunMode::DetectionOnly:
          predictions =
              run_detection_only(scenario.frames, detector, configs[c].theta_det);
          break;
      }
      const SequenceResult eval =
          evaluate_sequence(scenario.annotations, predictions, metric);
      results[c].trial_acc.push_back(eval.acc);
    }
  }

  for (auto& r : results) {
    double sum = 0.0;
    for (double acc : r.trial_acc) sum += acc;
    r.mean_acc = sum / static_cast<double>(trials);
    if (trials > 1) {
      double sq = 0.0;
      for (double acc : r.trial_acc) {
        const double d = acc - r.mean_acc;
        sq += d * d;
      }
      r.std_acc = std::sqrt(sq / static_cast<double>(trials - 1));
    }
    r.std_error = r.std_acc / std::sqrt(static_cast<double>(trials));
  }
  return results;
}

}  // namespace evitrack
