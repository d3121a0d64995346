#pragma once

#include <optional>
#include <vector>

#include "evitrack/box.hpp"
#include "evitrack/edl.hpp"
#include "evitrack/metric.hpp"

namespace evitrack {

// Abstract frame content: geometry only, no pixels. The ports below consume
// these states directly, so the whole loop runs without decoding video.
struct FrameState {
  int index = 0;
  int frame_width = 0;
  int frame_height = 0;
  std::optional<BoundingBox> target;     // ground-truth box when present
  std::vector<BoundingBox> distractors;  // persistent decoy objects
};

struct Detection {
  BoundingBox box;
  double score = 0.0;  // finite, in [0,1]
};

void validate_detection(const Detection& det);

struct TrackOutput {
  BoundingBox box;
  DirichletEvidence evidence;  // K=2, class 0 = target
};

// Whole-frame search for candidates.
class DetectorPort {
 public:
  virtual ~DetectorPort() = default;
  virtual std::vector<Detection> detect(const FrameState& frame) = 0;
};

enum class Mode { GlobalDetection, LocalTracking };

const char* to_string(Mode mode);

// The box the detector handed over, plus the frame it came from. Never
// updated while tracking.
struct TemplateInfo {
  BoundingBox box;
  int frame_index = 0;
};

// Template-conditioned localization around the last known target.
class TrackerPort {
 public:
  virtual ~TrackerPort() = default;
  virtual TrackOutput track(const TemplateInfo& tmpl, const FrameState& frame) = 0;
};

struct PipelineState {
  Mode mode = Mode::GlobalDetection;
  std::optional<TemplateInfo> tmpl;  // present iff mode == LocalTracking
  double theta_eh = 0.2;
  double theta_det = 0.5;
};

// Throws std::invalid_argument when the template presence disagrees with the
// mode or a threshold is outside [0,1].
void validate_state(const PipelineState& state);

struct StepOptions {
  // When tracking is rejected mid-frame, run detection on that same frame
  // instead of waiting for the next one. Off by default: one branch per
  // frame keeps per-frame work bounded.
  bool redetect_same_frame = false;
};

struct StepResult {
  PipelineState state;
  FramePrediction prediction;
};

// Index of the winning detection: highest score, ties broken by larger box
// area, then by scan order. nullopt when the list is empty.
std::optional<std::size_t> best_detection(const std::vector<Detection>& detections);

// One frame of the alternating detect/track loop.
//   GlobalDetection: accept the best detection iff score >= theta_det; on
//   accept, emit its box, store it as the template, switch to LocalTracking.
//   LocalTracking: run the tracker, ask judge(evidence, theta_eh);
//   ContinueTracking emits the tracked box, SwitchToDetection emits absence,
//   clears the template, and hands the next frame to the detector.
StepResult step(const PipelineState& state, const FrameState& frame,
                DetectorPort& detector, TrackerPort& tracker,
                const StepOptions& options = {});

struct RunTrace {
  std::vector<FramePrediction> predictions;
  std::vector<Mode> modes;  // branch that handled each frame
};

// Folds step over the frames, starting in GlobalDetection with no template.
// Exactly one prediction per frame.
RunTrace run_sequence_traced(const std::vector<FrameState>& frames,
                             DetectorPort& detector, TrackerPort& tracker,
                             double theta_eh, double theta_det,
                             const StepOptions& options = {});

std::vector<FramePrediction> run_sequence(const std::vector<FrameState>& frames,
                                          DetectorPort& detector,
                                          TrackerPort& tracker, double theta_eh,
                                          double theta_det,
                                          const StepOptions& options = {});

// Detect-once-then-track-forever baseline: the uncertainty verdict is
// ignored, so the first accepted detection is terminal.
std::vector<FramePrediction> run_simple_combination(
    const std::vector<FrameState>& frames, DetectorPort& detector,
    TrackerPort& tracker, double theta_det);

// Detector on every frame, no tracker at all.
std::vector<FramePrediction> run_detection_only(
    const std::vector<FrameState>& frames, DetectorPort& detector,
    double theta_det);

}  // namespace evitrack
