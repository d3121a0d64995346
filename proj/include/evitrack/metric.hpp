#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "evitrack/box.hpp"

namespace evitrack {

// Per-frame challenge tags carried by annotations.
enum class Attribute { OV, OC, FM, SV, IC, DBC, TS };

const char* to_string(Attribute a);
std::optional<Attribute> attribute_from_string(const std::string& name);

// Ground truth for one frame: the target is visible iff a positive-area box
// is present.
struct FrameAnnotation {
  bool visible = false;
  std::optional<BoundingBox> box;
  std::set<Attribute> attributes;
};

// Throws std::invalid_argument when the visible flag and box disagree;
// frame_index >= 0 is included in the message.
void validate_annotation(const FrameAnnotation& ann, int frame_index = -1);

// System output for one frame; an absent box means "no target".
struct FramePrediction {
  std::optional<BoundingBox> box;

  friend bool operator==(const FramePrediction&, const FramePrediction&) = default;
};

struct EvalConfig {
  double alpha = 0.2;  // penalty weight
  double beta = 0.3;   // penalty exponent
};

struct SequenceResult {
  double acc = 0.0;
  double accuracy_term = 0.0;
  double penalty_term = 0.0;
  std::size_t num_frames = 0;    // T
  std::size_t num_visible = 0;   // T*
  std::size_t num_failures = 0;  // failures among visible frames
  std::vector<double> per_frame_scores;
  std::vector<bool> failure_flags;
};

// Per-frame accuracy in [0, 1]: IoU against the ground-truth box when the
// target is visible (an absent prediction counts as IoU 0), otherwise 1 for a
// correct absence prediction and 0 for a false alarm.
double frame_score(const FrameAnnotation& gt, const FramePrediction& pred);

// Localization failure: the target is visible and the prediction catches no
// part of it (absent box or IoU exactly 0). Never set on invisible frames.
bool failure_flag(const FrameAnnotation& gt, const FramePrediction& pred);

// Sequence score: mean frame_score over all T frames, minus
// alpha * (failures / T*)^beta over the T* visible frames. The penalty is 0
// when T* = 0. Throws on empty or mismatched inputs.
SequenceResult evaluate_sequence(const std::vector<FrameAnnotation>& annotations,
                                 const std::vector<FramePrediction>& predictions,
                                 const EvalConfig& config);

// Unweighted mean of per-sequence acc values; with weight_by_frames each
// sequence contributes proportionally to its frame count.
double evaluate_dataset(const std::vector<SequenceResult>& per_sequence,
                        bool weight_by_frames = false);

// evaluate_sequence restricted to frames carrying the tag, with T and T*
// recomputed on the subset. Empty subset yields nullopt rather than an error.
std::optional<SequenceResult> attribute_slice(
    const std::vector<FrameAnnotation>& annotations,
    const std::vector<FramePrediction>& predictions, Attribute tag,
    const EvalConfig& config);

}  // namespace evitrack
