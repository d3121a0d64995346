#include "evitrack/pipeline.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace evitrack {

namespace {

// Detection branch for one frame; shared by step and the baselines.
struct DetectionOutcome {
  std::optional<Detection> accepted;
};

DetectionOutcome detect_frame(const FrameState& frame, DetectorPort& detector,
                              double theta_det) {
  const std::vector<Detection> detections = detector.detect(frame);
  for (const auto& det : detections) validate_detection(det);
  const auto best = best_detection(detections);
  if (best && detections[*best].score >= theta_det) {
    return DetectionOutcome{detections[*best]};
  }
  return DetectionOutcome{std::nullopt};
}

}  // namespace

void validate_detection(const Detection& det) {
  validate_box(det.box);
  if (!std::isfinite(det.score) || det.score < 0.0 || det.score > 1.0) {
    throw std::invalid_argument("Detection: score must be finite and in [0,1]");
  }
}

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::GlobalDetection: return "GlobalDetection";
    case Mode::LocalTracking: return "LocalTracking";
  }
  throw std::invalid_argument("unknown mode value");
}

void validate_state(const PipelineState& state) {
  if (state.mode == Mode::LocalTracking && !state.tmpl) {
    throw std::invalid_argument("PipelineState: tracking mode without a template");
  }
  if (state.mode == Mode::GlobalDetection && state.tmpl) {
    throw std::invalid_argument("PipelineState: detection mode holding a template");
  }
  if (!std::isfinite(state.theta_eh) || state.theta_eh < 0.0 || state.theta_eh > 1.0) {
    throw std::invalid_argument("PipelineState: theta_eh must be in [0,1]");
  }
  if (!std::isfinite(state.theta_det) || state.theta_det < 0.0 || state.theta_det > 1.0) {
    throw std::invalid_argument("PipelineState: theta_det must be in [0,1]");
  }
  if (state.tmpl) validate_box(state.tmpl->box);
}

std::optional<std::size_t> best_detection(const std::vector<Detection>& detections) {
  if (detections.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < detections.size(); ++i) {
    if (detections[i].score > detections[best].score) {
      best = i;
    } else if (detections[i].score == detections[best].score &&
               box_area(detections[i].box) > box_area(detections[best].box)) {
      best = i;
    }
    // Equal score and area: keep the earlier index (scan order).
  }
  return best;
}

StepResult step(const PipelineState& state, const FrameState& frame,
                DetectorPort& detector, TrackerPort& tracker,
                const StepOptions& options) {
  validate_state(state);
  StepResult result;
  result.state = state;

  if (state.mode == Mode::GlobalDetection) {
    const auto outcome = detect_frame(frame, detector, state.theta_det);
    if (outcome.accepted) {
      result.state.mode = Mode::LocalTracking;
      result.state.tmpl = TemplateInfo{outcome.accepted->box, frame.index};
      result.prediction.box = outcome.accepted->box;
    }
    return result;
  }

  if (!state.tmpl) {
    throw std::logic_error("step: tracker invoked with absent template");
  }
  const TrackOutput tracked = tracker.track(*state.tmpl, frame);
  validate_box(tracked.box);
  if (judge(tracked.evidence, state.theta_eh) == Decision::ContinueTracking) {
    result.prediction.box = tracked.box;
    return result;
  }

  // The verdict distrusts this frame: report absence and fall back to the
  // detector. By default that happens on the next frame.
  result.state.mode = Mode::GlobalDetection;
  result.state.tmpl.reset();
  if (options.redetect_same_frame) {
    const auto outcome = detect_frame(frame, detector, state.theta_det);
    if (outcome.accepted) {
      result.state.mode = Mode::LocalTracking;
      result.state.tmpl = TemplateInfo{outcome.accepted->box, frame.index};
      result.prediction.box = outcome.accepted->box;
    }
  }
  return result;
}

RunTrace run_sequence_traced(const std::vector<FrameState>& frames,
                             DetectorPort& detector, TrackerPort& tracker,
                             double theta_eh, double theta_det,
                             const StepOptions& options) {
  if (frames.empty()) {
    throw std::invalid_argument("run_sequence: empty frame list");
  }
  PipelineState state;
  state.theta_eh = theta_eh;
  state.theta_det = theta_det;
  validate_state(state);

  RunTrace trace;
  trace.predictions.reserve(frames.size());
  trace.modes.reserve(frames.size());
  for (const auto& frame : frames) {
    trace.modes.push_back(state.mode);
    StepResult r = step(state, frame, detector, tracker, options);
    state = r.state;
    trace.predictions.push_back(r.prediction);
  }
  return trace;
}

std::vector<FramePrediction> run_sequence(const std::vector<FrameState>& frames,
                                          DetectorPort& detector,
                                          TrackerPort& tracker, double theta_eh,
                                          double theta_det,
                                          const StepOptions& options) {
  return run_sequence_traced(frames, detector, tracker, theta_eh, theta_det,
                             options)
      .predictions;
}

std::vector<FramePrediction> run_simple_combination(
    const std::vector<FrameState>& frames, DetectorPort& detector,
    TrackerPort& tracker, double theta_det) {
  if (frames.empty()) {
    throw std::invalid_argument("run_simple_combination: empty frame list");
  }
  PipelineState state;
  state.theta_det = theta_det;
  validate_state(state);

  std::vector<FramePrediction> predictions;
  predictions.reserve(frames.size());
  for (const auto& frame : frames) {
    FramePrediction pred;
    if (state.mode == Mode::GlobalDetection) {
      const auto outcome = detect_frame(frame, detector, state.theta_det);
      if (outcome.accepted) {
        state.mode = Mode::LocalTracking;
        state.tmpl = TemplateInfo{outcome.accepted->box, frame.index};
        pred.box = outcome.accepted->box;
      }
    } else {
      // No verdict here: the handoff is one way.
      const TrackOutput tracked = tracker.track(*state.tmpl, frame);
      validate_box(tracked.box);
      pred.box = tracked.box;
    }
    predictions.push_back(pred);
  }
  return predictions;
}

std::vector<FramePrediction> run_detection_only(
    const std::vector<FrameState>& frames, DetectorPort& detector,
    double theta_det) {
  if (frames.empty()) {
    throw std::invalid_argument("run_detection_only: empty frame list");
  }
  std::vector<FramePrediction> predictions;
  predictions.reserve(frames.size());
  for (const auto& frame : frames) {
    FramePrediction pred;
    const auto outcome = detect_frame(frame, detector, theta_det);
    if (outcome.accepted) pred.box = outcome.accepted->box;
    predictions.push_back(pred);
  }
  return predictions;
}

}  // namespace evitrack
