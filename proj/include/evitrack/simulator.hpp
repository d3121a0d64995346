#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evitrack/box.hpp"
#include "evitrack/metric.hpp"
#include "evitrack/pipeline.hpp"
#include "evitrack/rng.hpp"

namespace evitrack {

// Frame range [start, end) during which the target is in view.
struct PresenceInterval {
  int start = 0;
  int end = 0;
};

// Piecewise-smooth random walk of the target's box center: the heading
// drifts by at most turn_rate per frame and the box bounces off the frame
// edges (or the scenario is rejected when bounce is off and the path exits).
struct TrajectorySpec {
  double box_width = 24.0;
  double box_height = 20.0;
  double speed = 3.0;        // px per frame
  double turn_rate = 0.1;    // max heading change per frame, radians
  bool bounce = true;
  std::optional<double> start_x;  // box center; drawn from the seed if unset
  std::optional<double> start_y;
  std::optional<double> heading;  // radians; drawn from the seed if unset
  double size_wobble = 0.0;  // relative per-frame size jitter, in [0, 0.9]
  int fast_bursts = 0;       // frames on which the step length spikes
  double burst_jump = 0.0;   // step length on burst frames
};

struct ScenarioSpec {
  int frame_width = 640;
  int frame_height = 512;
  int num_frames = 1;
  std::vector<PresenceInterval> presence;
  TrajectorySpec trajectory;
  int num_distractors = 0;
  double distractor_min_size = 12.0;
  double distractor_max_size = 28.0;
  std::uint64_t seed = 0;
};

void validate_scenario_spec(const ScenarioSpec& spec);

struct Scenario {
  std::vector<FrameState> frames;
  std::vector<FrameAnnotation> annotations;
};

// Deterministic given spec.seed. Visibility follows the presence intervals
// exactly; the trajectory evolves across absence gaps so the target reenters
// at a consistent position. Distractors are static boxes present throughout.
Scenario generate_scenario(const ScenarioSpec& spec);

// Uniform law on [lo, hi]; degenerate lo == hi gives the constant.
struct ScoreLaw {
  double lo = 0.0;
  double hi = 1.0;
};

struct SimDetectorModel {
  double recall = 1.0;               // per-frame chance of finding the target
  double false_positive_rate = 0.0;  // per-frame chance, per distractor
  double localization_noise = 0.0;   // center jitter stddev, px; size uses half
  ScoreLaw true_score{0.55, 0.95};
  ScoreLaw false_score{0.40, 0.90};
};

void validate_detector_model(const SimDetectorModel& model);

// Two-class evidence draws: one uniform range per class component.
struct EvidenceLaw {
  double target_lo = 0.0;
  double target_hi = 0.0;
  double background_lo = 0.0;
  double background_hi = 0.0;
};

// The on_target defaults keep uncertainty below 0.053 with the target class
// dominant; the off_target defaults keep uncertainty at 0.2 or above with the
// class vote only weakly informative. The gap is what the switching threshold
// acts on.
struct SimTrackerModel {
  double per_frame_drift = 0.0;        // on-target box jitter stddev, px
  double lock_loss_probability = 0.0;  // per-frame chance of losing the target
  double stale_drift = 2.0;            // random-walk stddev once lost, px
  double acquisition_iou = 0.3;        // template overlap needed to lock on
  double confusion_rate = 0.0;         // chance the evidence regime is flipped
  EvidenceLaw on_target{36.0, 86.0, 0.0, 1.0};
  EvidenceLaw off_target{1.0, 5.5, 0.0, 2.5};
};

void validate_tracker_model(const SimTrackerModel& model);

// Gaussian perturbation of position and size; sizes are clamped to >= 1 px.
// Always consumes four normal draws so callers' draw order stays fixed.
BoundingBox jitter_box(const BoundingBox& box, double sigma_pos,
                       double sigma_size, Rng& rng);

// One frame of detector output: the true box (with noise and a score from
// true_score) with probability recall when the target is visible, plus each
// distractor (noised, scored from false_score) with probability
// false_positive_rate.
std::vector<Detection> simulate_detector(const SimDetectorModel& model,
                                         const FrameState& frame,
                                         const FrameAnnotation& annotation,
                                         Rng& rng);

// Whether the simulated tracker still follows the real target. Once lost
// (absence, a lock-loss draw, or a template that never overlapped the truth)
// the lock never comes back; only a fresh template can re-acquire.
struct TrackerLockState {
  bool initialized = false;
  int template_frame = -1;
  bool locked = false;
  BoundingBox stale_box{0.0, 0.0, 1.0, 1.0};
};

// Locks on iff the template box overlaps the truth at the template's own
// frame by at least acquisition_iou.
void acquire_lock(const SimTrackerModel& model, const TemplateInfo& tmpl,
                  const FrameAnnotation& template_frame_truth,
                  TrackerLockState& lock);

// One tracked frame. While locked on a visible target: truth box plus drift
// and on-target evidence. Otherwise: the stale box random-walks and the
// off-target law applies. confusion_rate flips which law is sampled.
// Requires lock acquired for this template (throws std::logic_error).
TrackOutput simulate_tracker(const SimTrackerModel& model,
                             const TemplateInfo& tmpl, const FrameState& frame,
                             const FrameAnnotation& annotation,
                             TrackerLockState& lock, Rng& rng);

// DetectorPort over the abstract frames: per-frame RNG streams are derived
// from (seed, frame index), so results do not depend on which frames the
// pipeline chose to run detection on.
class SimDetector : public DetectorPort {
 public:
  SimDetector(const SimDetectorModel& model, std::uint64_t seed);
  std::vector<Detection> detect(const FrameState& frame) override;

 private:
  SimDetectorModel model_;
  std::uint64_t seed_;
};

// TrackerPort that knows the scenario truth; per-frame streams as above.
// Holds the lock state across frames and re-acquires when the pipeline hands
// over a new template.
class SimTracker : public TrackerPort {
 public:
  SimTracker(const SimTrackerModel& model,
             std::vector<FrameAnnotation> annotations, std::uint64_t seed);
  TrackOutput track(const TemplateInfo& tmpl, const FrameState& frame) override;

  const TrackerLockState& lock_state() const { return lock_; }

 private:
  SimTrackerModel model_;
  std::vector<FrameAnnotation> annotations_;
  std::uint64_t seed_;
  TrackerLockState lock_;
};

enum class RunMode { EvidentialCombination, SimpleCombination, DetectionOnly };

const char* to_string(RunMode mode);
std::optional<RunMode> run_mode_from_string(const std::string& name);

struct RunConfig {
  std::string name;  // row label in result tables
  RunMode mode = RunMode::EvidentialCombination;
  double theta_eh = 0.2;
  double theta_det = 0.5;
};

struct ConfigResult {
  RunConfig config;
  std::vector<double> trial_acc;  // per trial, in trial order
  double mean_acc = 0.0;
  double std_acc = 0.0;    // sample standard deviation (n-1)
  double std_error = 0.0;  // std_acc / sqrt(trials)
};

// Runs every config over the same `trials` seeded scenarios (paired design:
// trial t shares its scenario and detector/tracker noise streams across
// configs, so config differences are purely algorithmic). Deterministic
// given spec.seed.
std::vector<ConfigResult> run_experiment(const ScenarioSpec& spec,
                                         const SimDetectorModel& detector_model,
                                         const SimTrackerModel& tracker_model,
                                         const std::vector<RunConfig>& configs,
                                         int trials,
                                         const EvalConfig& metric = {});

}  // namespace evitrack
