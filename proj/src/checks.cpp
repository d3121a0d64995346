#include "evitrack/checks.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "evitrack/box.hpp"
#include "evitrack/edl.hpp"
#include "evitrack/mat.hpp"
#include "evitrack/metric.hpp"
#include "evitrack/rdm.hpp"
#include "evitrack/reference.hpp"
#include "evitrack/rng.hpp"

namespace evitrack {

namespace {

void record_failure(CheckReport& report, int case_index, const std::string& what) {
  ++report.failures;
  if (report.messages.size() < 8) {
    report.messages.push_back("case " + std::to_string(case_index) + ": " + what);
  }
}

// Box with all coordinates on the 1/64 px grid inside a 1024 px frame.
// Dyadic coordinates make intersection arithmetic exact in both double and
// long double, so the two sides always agree on IoU == 0.
BoundingBox grid_box(Rng& rng) {
  const double x = static_cast<double>(rng.uniform_int(0, 1024 * 64 - 64)) / 64.0;
  const double y = static_cast<double>(rng.uniform_int(0, 1024 * 64 - 64)) / 64.0;
  const double w = static_cast<double>(rng.uniform_int(1, 100 * 64)) / 64.0;
  const double h = static_cast<double>(rng.uniform_int(1, 100 * 64)) / 64.0;
  return BoundingBox{x, y, w, h};
}

// A box near `base`, shifted on the same grid; overlaps most of the time.
BoundingBox near_box(const BoundingBox& base, Rng& rng) {
  const double dx = static_cast<double>(rng.uniform_int(0, 4 * 64)) / 64.0 -
                    2.0;
  const double dy = static_cast<double>(rng.uniform_int(0, 4 * 64)) / 64.0 -
                    2.0;
  const double dw = static_cast<double>(rng.uniform_int(0, 64)) / 64.0;
  return BoundingBox{base.x + dx, base.y + dy, base.w + dw, base.h};
}

Mat random_mat(Rng& rng, int rows, int cols, double magnitude) {
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      m(r, c) = rng.uniform(-magnitude, magnitude);
    }
  }
  return m;
}

std::vector<std::vector<double>> to_nested(const Mat& m) {
  std::vector<std::vector<double>> out(
      static_cast<std::size_t>(m.rows()),
      std::vector<double>(static_cast<std::size_t>(m.cols()), 0.0));
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      out[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = m(r, c);
    }
  }
  return out;
}

}  // namespace

CheckReport check_metric(int cases, std::uint64_t seed) {
  CheckReport report;
  report.name = "metric";
  for (int i = 0; i < cases; ++i) {
    Rng rng = derive_stream(seed, static_cast<std::uint64_t>(i));
    const int length = static_cast<int>(rng.uniform_int(1, 500));
    const double alpha = rng.uniform(0.0, 1.0);
    const double beta = rng.uniform(0.1, 1.0);

    std::vector<FrameAnnotation> annotations;
    std::vector<FramePrediction> predictions;
    annotations.reserve(static_cast<std::size_t>(length));
    predictions.reserve(static_cast<std::size_t>(length));
    for (int t = 0; t < length; ++t) {
      FrameAnnotation ann;
      FramePrediction pred;
      if (rng.bernoulli(0.7)) {
        ann.visible = true;
        ann.box = grid_box(rng);
        const double kind = rng.uniform(0.0, 1.0);
        if (kind < 0.5) {
          pred.box = near_box(*ann.box, rng);  // usually a hit
        } else if (kind < 0.85) {
          pred.box = grid_box(rng);  // usually a clean miss
        }
        // else: predicted absent on a visible frame
      } else if (rng.bernoulli(0.3)) {
        pred.box = grid_box(rng);  // false alarm on an empty frame
      }
      annotations.push_back(std::move(ann));
      predictions.push_back(std::move(pred));
    }

    const EvalConfig config{alpha, beta};
    const double got = evaluate_sequence(annotations, predictions, config).acc;
    const long double want =
        reference::acc_literal(annotations, predictions, alpha, beta);
    const double diff = std::abs(static_cast<double>(
        static_cast<long double>(got) - want));
    ++report.cases_run;
    if (!(diff <= 1e-12)) {
      record_failure(report, i,
                     "acc mismatch " + std::to_string(got) + " vs " +
                         std::to_string(static_cast<double>(want)) +
                         " (diff " + std::to_string(diff) + ")");
    }
  }
  return report;
}

CheckReport check_edl_against(const RawLossFn& loss, const RawGradFn& grad,
                              int cases, std::uint64_t seed) {
  CheckReport report;
  report.name = "edl";
  static const int kClassCounts[3] = {2, 3, 5};
  const double h = 1e-4;
  for (int i = 0; i < cases; ++i) {
    Rng rng = derive_stream(seed, static_cast<std::uint64_t>(i));
    const int num_classes = kClassCounts[i % 3];
    std::vector<double> evidence(static_cast<std::size_t>(num_classes));
    for (double& e : evidence) {
      e = rng.bernoulli(0.15) ? 0.0 : rng.uniform(0.0, 50.0);
    }
    const int true_class =
        static_cast<int>(rng.uniform_int(0, num_classes - 1));
    ++report.cases_run;

    bool ok = true;
    std::string what;

    const DirichletEvidence ev(evidence);
    const auto probs = ev.probabilities();
    double prob_sum = 0.0;
    for (double p : probs) prob_sum += p;
    if (std::abs(prob_sum - 1.0) > 1e-12) {
      ok = false;
      what = "probabilities sum to " + std::to_string(prob_sum);
    }
    const double u = ev.uncertainty();
    if (ok && !(u > 0.0 && u <= 1.0)) {
      ok = false;
      what = "uncertainty " + std::to_string(u) + " outside (0,1]";
    }

    if (ok) {
      const double production = edl_loss(ev, ClassLabel(true_class, num_classes));
      const double center = loss(evidence, true_class);
      if (std::abs(production - center) > 1e-12) {
        ok = false;
        what = "loss disagrees with the probe function: " +
               std::to_string(production) + " vs " + std::to_string(center);
      }
    }

    if (ok) {
      const auto analytic = grad(evidence, true_class);
      const auto numeric = reference::central_difference(
          [&](const std::vector<double>& e) { return loss(e, true_class); },
          evidence, h);
      for (std::size_t k = 0; k < analytic.size(); ++k) {
        const double denom = std::max(std::abs(analytic[k]), 1e-10);
        const double rel = std::abs(analytic[k] - numeric[k]) / denom;
        if (!(rel <= 1e-6)) {
          ok = false;
          what = "gradient component " + std::to_string(k) + " rel error " +
                 std::to_string(rel);
          break;
        }
      }
    }

    if (!ok) record_failure(report, i, what);
  }
  return report;
}

CheckReport check_edl(int cases, std::uint64_t seed) {
  const RawLossFn loss = [](const std::vector<double>& evidence,
                            int true_class) {
    return reference::edl_loss_raw(evidence, true_class);
  };
  const RawGradFn grad = [](const std::vector<double>& evidence,
                            int true_class) {
    const DirichletEvidence ev(evidence);
    return edl_loss_grad(ev,
                         ClassLabel(true_class, static_cast<int>(evidence.size())));
  };
  return check_edl_against(loss, grad, cases, seed);
}

CheckReport check_rdm(int cases, std::uint64_t seed) {
  CheckReport report;
  report.name = "rdm";
  for (int i = 0; i < cases; ++i) {
    Rng rng = derive_stream(seed, static_cast<std::uint64_t>(i));
    const int d = static_cast<int>(rng.uniform_int(1, 16));
    const int n_q = static_cast<int>(rng.uniform_int(1, 12));
    const int n_k = static_cast<int>(rng.uniform_int(1, 12));
    const double magnitude = (i % 7 == 0) ? 100.0 : 3.0;
    const Mat q = random_mat(rng, n_q, d, magnitude);
    const Mat k = random_mat(rng, n_k, d, magnitude);
    const Mat v = random_mat(rng, n_k, d, magnitude);
    ++report.cases_run;

    bool ok = true;
    std::string what;

    const Mat weights = attention_weights(q, k);
    for (int r = 0; r < weights.rows() && ok; ++r) {
      double row_sum = 0.0;
      for (int c = 0; c < weights.cols(); ++c) {
        const double w = weights(r, c);
        if (w < 0.0 || w > 1.0) {
          ok = false;
          what = "weight outside [0,1]: " + std::to_string(w);
          break;
        }
        row_sum += w;
      }
      if (ok && std::abs(row_sum - 1.0) > 1e-12) {
        ok = false;
        what = "weight row sums to " + std::to_string(row_sum);
      }
    }

    const Mat out = scaled_attention(q, k, v);
    for (int c = 0; c < v.cols() && ok; ++c) {
      double lo = v(0, c);
      double hi = v(0, c);
      for (int r = 1; r < v.rows(); ++r) {
        lo = std::min(lo, v(r, c));
        hi = std::max(hi, v(r, c));
      }
      for (int r = 0; r < out.rows(); ++r) {
        if (out(r, c) < lo - 1e-9 || out(r, c) > hi + 1e-9) {
          ok = false;
          what = "output escapes the value envelope at (" + std::to_string(r) +
                 "," + std::to_string(c) + ")";
          break;
        }
      }
    }

    if (ok) {
      const Mat empty(0, d);
      const Mat cross = cross_attention_ts(q, empty, k, empty, v);
      if (!(cross == out)) {
        ok = false;
        what = "empty-template cross-attention differs from self-attention";
      }
    }

    if (ok) {
      const int side_t = static_cast<int>(rng.uniform_int(1, 3));
      const int side_s = static_cast<int>(rng.uniform_int(1, 4));
      TokenMatrix tmpl{random_mat(rng, side_t * side_t, d, 2.0),
                       TokenOrigin::Template};
      TokenMatrix search{random_mat(rng, side_s * side_s, d, 2.0),
                         TokenOrigin::Search};
      const RdmWeights block =
          RdmWeights::random(d, mix_keys(seed, static_cast<std::uint64_t>(i)));
      const auto [out_t, out_s] = rdm_forward(tmpl, search, block);
      const auto [ref_t, ref_s] = reference::rdm_forward_reference(
          to_nested(tmpl.tokens), to_nested(search.tokens), block);
      double max_diff = 0.0;
      for (int r = 0; r < out_t.tokens.rows(); ++r) {
        for (int c = 0; c < out_t.tokens.cols(); ++c) {
          max_diff = std::max(max_diff,
                              std::abs(out_t.tokens(r, c) -
                                       ref_t[static_cast<std::size_t>(r)]
                                            [static_cast<std::size_t>(c)]));
        }
      }
      for (int r = 0; r < out_s.tokens.rows(); ++r) {
        for (int c = 0; c < out_s.tokens.cols(); ++c) {
          max_diff = std::max(max_diff,
                              std::abs(out_s.tokens(r, c) -
                                       ref_s[static_cast<std::size_t>(r)]
                                            [static_cast<std::size_t>(c)]));
        }
      }
      if (!(max_diff <= 1e-10)) {
        ok = false;
        what = "forward pass deviates from the reference by " +
               std::to_string(max_diff);
      }
    }

    if (!ok) record_failure(report, i, what);
  }
  return report;
}

}  // namespace evitrack
