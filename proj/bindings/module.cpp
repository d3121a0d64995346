#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "evitrack/box.hpp"
#include "evitrack/edl.hpp"
#include "evitrack/io.hpp"
#include "evitrack/mat.hpp"
#include "evitrack/metric.hpp"
#include "evitrack/rdm.hpp"
#include "evitrack/simulator.hpp"

namespace py = pybind11;
using namespace evitrack;

namespace {

using Box4 = std::array<double, 4>;
using Rows = std::vector<std::vector<double>>;

BoundingBox to_box(const Box4& b) { return BoundingBox{b[0], b[1], b[2], b[3]}; }

Box4 from_box(const BoundingBox& b) { return Box4{b.x, b.y, b.w, b.h}; }

std::optional<FrameSize> to_frame(const std::optional<std::pair<double, double>>& f) {
  if (!f) return std::nullopt;
  return FrameSize{f->first, f->second};
}

Rows mat_to_rows(const Mat& m) {
  Rows rows(static_cast<std::size_t>(m.rows()),
            std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = m(r, c);
    }
  }
  return rows;
}

std::vector<FrameAnnotation> to_annotations(
    const std::vector<std::optional<Box4>>& boxes) {
  std::vector<FrameAnnotation> out;
  out.reserve(boxes.size());
  for (const auto& b : boxes) {
    FrameAnnotation ann;
    if (b) {
      ann.visible = true;
      ann.box = to_box(*b);
    }
    out.push_back(std::move(ann));
  }
  return out;
}

std::vector<FramePrediction> to_predictions(
    const std::vector<std::optional<Box4>>& boxes) {
  std::vector<FramePrediction> out;
  out.reserve(boxes.size());
  for (const auto& b : boxes) {
    FramePrediction pred;
    if (b) pred.box = to_box(*b);
    out.push_back(pred);
  }
  return out;
}

py::dict score_sequence_py(const std::vector<std::optional<Box4>>& annotations,
                           const std::vector<std::optional<Box4>>& predictions,
                           double alpha, double beta) {
  const auto result = evaluate_sequence(to_annotations(annotations),
                                        to_predictions(predictions),
                                        EvalConfig{alpha, beta});
  py::dict d;
  d["acc"] = result.acc;
  d["accuracy_term"] = result.accuracy_term;
  d["penalty_term"] = result.penalty_term;
  d["num_frames"] = result.num_frames;
  d["num_visible"] = result.num_visible;
  d["num_failures"] = result.num_failures;
  d["per_frame_scores"] = result.per_frame_scores;
  d["failure_flags"] = result.failure_flags;
  return d;
}

py::dict dirichlet_predict_py(const std::vector<double>& evidence) {
  const DirichletEvidence ev(evidence);
  py::dict d;
  d["probabilities"] = ev.probabilities();
  d["uncertainty"] = ev.uncertainty();
  return d;
}

double edl_loss_py(const std::vector<double>& evidence, int true_class) {
  const DirichletEvidence ev(evidence);
  return edl_loss(ev, ClassLabel(true_class, ev.num_classes()));
}

std::vector<double> edl_loss_grad_py(const std::vector<double>& evidence,
                                     int true_class) {
  const DirichletEvidence ev(evidence);
  return edl_loss_grad(ev, ClassLabel(true_class, ev.num_classes()));
}

bool judge_py(const std::vector<double>& evidence, double theta_eh) {
  return judge(DirichletEvidence(evidence), theta_eh) ==
         Decision::ContinueTracking;
}

Rows scaled_attention_py(const Rows& q, const Rows& k, const Rows& v) {
  return mat_to_rows(scaled_attention(Mat::from_rows(q), Mat::from_rows(k),
                                      Mat::from_rows(v)));
}

std::pair<Rows, Rows> rdm_forward_py(const Rows& template_tokens,
                                     const Rows& search_tokens,
                                     std::uint64_t seed) {
  const Mat tmpl = Mat::from_rows(template_tokens);
  const Mat search = Mat::from_rows(search_tokens);
  const RdmWeights weights = RdmWeights::random(search.cols(), seed);
  const auto [t_out, s_out] =
      rdm_forward(TokenMatrix{tmpl, TokenOrigin::Template},
                  TokenMatrix{search, TokenOrigin::Search}, weights);
  return {mat_to_rows(t_out.tokens), mat_to_rows(s_out.tokens)};
}

py::list stage_shapes_py(int template_side_px, int search_side_px,
                         int base_channels) {
  py::list out;
  for (const auto& stage :
       stage_shapes(template_side_px, search_side_px, base_channels)) {
    py::dict d;
    d["template_side"] = stage.template_side;
    d["search_side"] = stage.search_side;
    d["channels"] = stage.channels;
    d["tokens"] = stage.token_count();
    out.append(d);
  }
  return out;
}

py::list run_experiment_json_py(const std::string& config_text) {
  ExperimentSpec spec = parse_experiment_spec(config_text, "config");
  finalize_experiment_spec(spec);
  const auto results = run_experiment(spec.scenario, spec.detector,
                                      spec.tracker, spec.configs, spec.trials,
                                      spec.metric);
  py::list out;
  for (const auto& r : results) {
    py::dict d;
    d["name"] = r.config.name;
    d["mode"] = to_string(r.config.mode);
    d["theta_eh"] = r.config.theta_eh;
    d["theta_det"] = r.config.theta_det;
    d["trials"] = r.trial_acc.size();
    d["mean_acc"] = r.mean_acc;
    d["std_acc"] = r.std_acc;
    d["std_error"] = r.std_error;
    d["trial_acc"] = r.trial_acc;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Deterministic scoring, evidence math, attention ops, and the "
            "detect/track simulator";

  m.def(
      "iou",
      [](const Box4& a, const Box4& b) { return iou(to_box(a), to_box(b)); },
      py::arg("a"), py::arg("b"),
      "Intersection over union of two (x, y, w, h) boxes");

  m.def(
      "box_loss",
      [](const Box4& pred, const Box4& gt, double lambda_iou, double lambda_l1,
         const std::optional<std::pair<double, double>>& frame) {
        return box_regression_loss(to_box(pred), to_box(gt),
                                   LossWeights{lambda_iou, lambda_l1},
                                   to_frame(frame));
      },
      py::arg("pred"), py::arg("gt"), py::arg("lambda_iou") = 2.0,
      py::arg("lambda_l1") = 5.0, py::arg("frame") = std::nullopt,
      "Weighted IoU-plus-L1 regression loss");

  m.def(
      "box_loss_grad",
      [](const Box4& pred, const Box4& gt, double lambda_iou, double lambda_l1,
         const std::optional<std::pair<double, double>>& frame) {
        const auto g = box_regression_loss_grad(
            to_box(pred), to_box(gt), LossWeights{lambda_iou, lambda_l1},
            to_frame(frame));
        py::dict d;
        d["grad"] = g.d;
        d["smooth"] = g.smooth;
        return d;
      },
      py::arg("pred"), py::arg("gt"), py::arg("lambda_iou") = 2.0,
      py::arg("lambda_l1") = 5.0, py::arg("frame") = std::nullopt,
      "Analytic loss gradient w.r.t. the predicted box");

  m.def("score_sequence", &score_sequence_py, py::arg("annotations"),
        py::arg("predictions"), py::arg("alpha") = 0.2, py::arg("beta") = 0.3,
        "Score one sequence; frames are (x, y, w, h) or None for absence");

  m.def("dirichlet_predict", &dirichlet_predict_py, py::arg("evidence"),
        "Class probabilities and predictive uncertainty for an evidence vector");

  m.def("edl_loss", &edl_loss_py, py::arg("evidence"), py::arg("true_class"),
        "Evidential log loss for the given true class");

  m.def("edl_loss_grad", &edl_loss_grad_py, py::arg("evidence"),
        py::arg("true_class"), "Analytic loss gradient w.r.t. the evidence");

  m.def("judge", &judge_py, py::arg("evidence"), py::arg("theta_eh"),
        "True when a two-class track should continue under the threshold");

  m.def("scaled_attention", &scaled_attention_py, py::arg("q"), py::arg("k"),
        py::arg("v"), "softmax(QK^T/sqrt(d)) V over nested-list matrices");

  m.def("rdm_forward", &rdm_forward_py, py::arg("template_tokens"),
        py::arg("search_tokens"), py::arg("seed") = 0,
        "Decoupled-attention block with seed-derived weights; returns "
        "(template_out, search_out)");

  m.def("stage_shapes", &stage_shapes_py, py::arg("template_side_px"),
        py::arg("search_side_px"), py::arg("base_channels"),
        "Token-grid sides, channels, and token counts for the three stages");

  m.def("run_experiment_json", &run_experiment_json_py, py::arg("config_text"),
        "Run a simulated experiment from a JSON config string; returns one "
        "dict per run configuration");
}
