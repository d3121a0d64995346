#include "evitrack/metric.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace evitrack {

const char* to_string(Attribute a) {
  switch (a) {
    case Attribute::OV: return "OV";
    case Attribute::OC: return "OC";
    case Attribute::FM: return "FM";
    case Attribute::SV: return "SV";
    case Attribute::IC: return "IC";
    case Attribute::DBC: return "DBC";
    case Attribute::TS: return "TS";
  }
  throw std::invalid_argument("unknown attribute value");
}

std::optional<Attribute> attribute_from_string(const std::string& name) {
  if (name == "OV") return Attribute::OV;
  if (name == "OC") return Attribute::OC;
  if (name == "FM") return Attribute::FM;
  if (name == "SV") return Attribute::SV;
  if (name == "IC") return Attribute::IC;
  if (name == "DBC") return Attribute::DBC;
  if (name == "TS") return Attribute::TS;
  return std::nullopt;
}

void validate_annotation(const FrameAnnotation& ann, int frame_index) {
  const std::string where =
      frame_index >= 0 ? " at frame " + std::to_string(frame_index) : "";
  if (ann.visible) {
    if (!ann.box) {
      throw std::invalid_argument("visible annotation without a box" + where);
    }
    validate_box(*ann.box);
  } else if (ann.box) {
    throw std::invalid_argument("invisible annotation carries a box" + where);
  }
}

double frame_score(const FrameAnnotation& gt, const FramePrediction& pred) {
  if (gt.visible) {
    if (!pred.box) return 0.0;
    return iou(*gt.box, *pred.box);
  }
  return pred.box ? 0.0 : 1.0;
}

bool failure_flag(const FrameAnnotation& gt, const FramePrediction& pred) {
  if (!gt.visible) return false;
  if (!pred.box) return true;
  return iou(*gt.box, *pred.box) == 0.0;
}

SequenceResult evaluate_sequence(const std::vector<FrameAnnotation>& annotations,
                                 const std::vector<FramePrediction>& predictions,
                                 const EvalConfig& config) {
  if (annotations.empty()) {
    throw std::invalid_argument("evaluate_sequence: empty sequence");
  }
  if (annotations.size() != predictions.size()) {
    throw std::invalid_argument(
        "evaluate_sequence: annotation/prediction length mismatch (" +
        std::to_string(annotations.size()) + " vs " +
        std::to_string(predictions.size()) + ")");
  }

  SequenceResult result;
  result.num_frames = annotations.size();
  result.per_frame_scores.reserve(annotations.size());
  result.failure_flags.reserve(annotations.size());

  double score_sum = 0.0;
  for (std::size_t t = 0; t < annotations.size(); ++t) {
    validate_annotation(annotations[t], static_cast<int>(t));
    const double s = frame_score(annotations[t], predictions[t]);
    const bool failed = failure_flag(annotations[t], predictions[t]);
    result.per_frame_scores.push_back(s);
    result.failure_flags.push_back(failed);
    score_sum += s;
    if (annotations[t].visible) {
      ++result.num_visible;
      if (failed) ++result.num_failures;
    }
  }

  result.accuracy_term = score_sum / static_cast<double>(result.num_frames);
  if (result.num_visible > 0) {
    const double failure_rate = static_cast<double>(result.num_failures) /
                                static_cast<double>(result.num_visible);
    result.penalty_term = config.alpha * std::pow(failure_rate, config.beta);
  }
  result.acc = result.accuracy_term - result.penalty_term;
  return result;
}

double evaluate_dataset(const std::vector<SequenceResult>& per_sequence,
                        bool weight_by_frames) {
  if (per_sequence.empty()) {
    throw std::invalid_argument("evaluate_dataset: no sequences");
  }
  if (!weight_by_frames) {
    double sum = 0.0;
    for (const auto& r : per_sequence) sum += r.acc;
    return sum / static_cast<double>(per_sequence.size());
  }
  double weighted = 0.0;
  double total_frames = 0.0;
  for (const auto& r : per_sequence) {
    weighted += r.acc * static_cast<double>(r.num_frames);
    total_frames += static_cast<double>(r.num_frames);
  }
  if (total_frames == 0.0) {
    throw std::invalid_argument("evaluate_dataset: zero total frames");
  }
  return weighted / total_frames;
}

std::optional<SequenceResult> attribute_slice(
    const std::vector<FrameAnnotation>& annotations,
    const std::vector<FramePrediction>& predictions, Attribute tag,
    const EvalConfig& config) {
  if (annotations.size() != predictions.size()) {
    throw std::invalid_argument(
        "attribute_slice: annotation/prediction length mismatch");
  }
  std::vector<FrameAnnotation> sub_ann;
  std::vector<FramePrediction> sub_pred;
  for (std::size_t t = 0; t < annotations.size(); ++t) {
    if (annotations[t].attributes.count(tag) > 0) {
      sub_ann.push_back(annotations[t]);
      sub_pred.push_back(predictions[t]);
    }
  }
  if (sub_ann.empty()) return std::nullopt;
  return evaluate_sequence(sub_ann, sub_pred, config);
}

}  // namespace evitrack
