#include "evitrack/reference.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace evitrack::reference {

namespace {

long double iou_literal(const BoundingBox& a, const BoundingBox& b) {
  const long double ax1 = a.x, ay1 = a.y;
  const long double ax2 = ax1 + static_cast<long double>(a.w);
  const long double ay2 = ay1 + static_cast<long double>(a.h);
  const long double bx1 = b.x, by1 = b.y;
  const long double bx2 = bx1 + static_cast<long double>(b.w);
  const long double by2 = by1 + static_cast<long double>(b.h);
  long double iw = (ax2 < bx2 ? ax2 : bx2) - (ax1 > bx1 ? ax1 : bx1);
  long double ih = (ay2 < by2 ? ay2 : by2) - (ay1 > by1 ? ay1 : by1);
  if (iw < 0.0L) iw = 0.0L;
  if (ih < 0.0L) ih = 0.0L;
  const long double inter = iw * ih;
  const long double area_a = static_cast<long double>(a.w) * a.h;
  const long double area_b = static_cast<long double>(b.w) * b.h;
  const long double uni = area_a + area_b - inter;
  if (uni <= 0.0L) return 0.0L;
  return inter / uni;
}

std::vector<std::vector<double>> matmul_plain(
    const std::vector<std::vector<double>>& a,
    const std::vector<std::vector<double>>& b) {
  const std::size_t n = a.size();
  const std::size_t k = b.size();
  const std::size_t m = b.empty() ? 0 : b[0].size();
  std::vector<std::vector<double>> out(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += a[i][t] * b[t][j];
      out[i][j] = acc;
    }
  }
  return out;
}

std::vector<std::vector<double>> from_mat(const Mat& m) {
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

// softmax(rows of q . rows of k / sqrt(d)) . v, written out longhand.
std::vector<std::vector<double>> attention_plain(
    const std::vector<std::vector<double>>& q,
    const std::vector<std::vector<double>>& k,
    const std::vector<std::vector<double>>& v) {
  const std::size_t nq = q.size();
  const std::size_t nk = k.size();
  const std::size_t d = q.empty() ? 0 : q[0].size();
  const std::size_t dv = v.empty() ? 0 : v[0].size();
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<std::vector<double>> out(nq, std::vector<double>(dv, 0.0));
  for (std::size_t i = 0; i < nq; ++i) {
    std::vector<double> logits(nk, 0.0);
    for (std::size_t j = 0; j < nk; ++j) {
      double dot = 0.0;
      for (std::size_t t = 0; t < d; ++t) dot += q[i][t] * k[j][t];
      logits[j] = dot * inv_sqrt_d;
    }
    double max_logit = logits[0];
    for (double l : logits) max_logit = l > max_logit ? l : max_logit;
    double denom = 0.0;
    std::vector<double> weights(nk, 0.0);
    for (std::size_t j = 0; j < nk; ++j) {
      weights[j] = std::exp(logits[j] - max_logit);
      denom += weights[j];
    }
    for (std::size_t j = 0; j < nk; ++j) {
      const double w = weights[j] / denom;
      for (std::size_t t = 0; t < dv; ++t) out[i][t] += w * v[j][t];
    }
  }
  return out;
}

std::vector<std::vector<double>> depthwise_plain(
    const std::vector<std::vector<double>>& tokens,
    const std::vector<std::array<double, 9>>& kernels) {
  const std::size_t n = tokens.size();
  const std::size_t d = tokens.empty() ? 0 : tokens[0].size();
  std::size_t side = 0;
  while (side * side < n) ++side;
  if (side * side != n) {
    throw std::invalid_argument("reference: token count is not a perfect square");
  }
  std::vector<std::vector<double>> out(n, std::vector<double>(d, 0.0));
  for (std::size_t gy = 0; gy < side; ++gy) {
    for (std::size_t gx = 0; gx < side; ++gx) {
      for (std::size_t c = 0; c < d; ++c) {
        double acc = 0.0;
        for (int ky = -1; ky <= 1; ++ky) {
          for (int kx = -1; kx <= 1; ++kx) {
            const long long ny = static_cast<long long>(gy) + ky;
            const long long nx = static_cast<long long>(gx) + kx;
            if (ny < 0 || ny >= static_cast<long long>(side) || nx < 0 ||
                nx >= static_cast<long long>(side)) {
              continue;
            }
            acc += kernels[c][static_cast<std::size_t>((ky + 1) * 3 + (kx + 1))] *
                   tokens[static_cast<std::size_t>(ny) * side +
                          static_cast<std::size_t>(nx)][c];
          }
        }
        out[gy * side + gx][c] = acc;
      }
    }
  }
  return out;
}

}  // namespace

long double acc_literal(const std::vector<FrameAnnotation>& annotations,
                        const std::vector<FramePrediction>& predictions,
                        double alpha, double beta) {
  if (annotations.empty() || annotations.size() != predictions.size()) {
    throw std::invalid_argument("acc_literal: bad sequence");
  }
  const std::size_t total = annotations.size();
  long double score_sum = 0.0L;
  std::size_t visible = 0;
  std::size_t failures = 0;
  for (std::size_t t = 0; t < total; ++t) {
    const FrameAnnotation& gt = annotations[t];
    const FramePrediction& pred = predictions[t];
    if (gt.visible) {
      ++visible;
      long double overlap = 0.0L;
      if (pred.box) overlap = iou_literal(*gt.box, *pred.box);
      score_sum += overlap;
      if (!pred.box || overlap == 0.0L) ++failures;
    } else {
      score_sum += pred.box ? 0.0L : 1.0L;
    }
  }
  long double penalty = 0.0L;
  if (visible > 0) {
    penalty = static_cast<long double>(alpha) *
              std::pow(static_cast<long double>(failures) /
                           static_cast<long double>(visible),
                       static_cast<long double>(beta));
  }
  return score_sum / static_cast<long double>(total) - penalty;
}

double edl_loss_raw(const std::vector<double>& evidence, int true_class) {
  double strength = static_cast<double>(evidence.size());
  for (double e : evidence) strength += e;
  const double alpha_c = evidence[static_cast<std::size_t>(true_class)] + 1.0;
  return std::log(strength) - std::log(alpha_c);
}

std::pair<std::vector<std::vector<double>>, std::vector<std::vector<double>>>
rdm_forward_reference(const std::vector<std::vector<double>>& template_tokens,
                      const std::vector<std::vector<double>>& search_tokens,
                      const RdmWeights& weights) {
  const auto wq_t = from_mat(weights.wq_t);
  const auto wk_t = from_mat(weights.wk_t);
  const auto wv_t = from_mat(weights.wv_t);
  const auto wq_s = from_mat(weights.wq_s);
  const auto wk_s = from_mat(weights.wk_s);
  const auto wv_s = from_mat(weights.wv_s);
  const auto reduce = from_mat(weights.reduce);
  const auto out_proj = from_mat(weights.out_proj);

  const auto mixed_t = depthwise_plain(template_tokens, weights.depthwise);
  const auto mixed_s = depthwise_plain(search_tokens, weights.depthwise);

  const auto q_t = matmul_plain(mixed_t, wq_t);
  const auto k_t = matmul_plain(mixed_t, wk_t);
  const auto v_t = matmul_plain(mixed_t, wv_t);
  const auto q_s = matmul_plain(mixed_s, wq_s);
  const auto k_s = matmul_plain(mixed_s, wk_s);
  const auto v_s = matmul_plain(mixed_s, wv_s);

  const auto self_t = attention_plain(q_t, k_t, v_t);
  const auto self_s = attention_plain(q_s, k_s, v_s);

  std::vector<std::vector<double>> k_joint = k_t;
  k_joint.insert(k_joint.end(), k_s.begin(), k_s.end());
  std::vector<std::vector<double>> v_joint = v_t;
  v_joint.insert(v_joint.end(), v_s.begin(), v_s.end());
  const auto cross_ts = attention_plain(q_s, k_joint, v_joint);

  std::vector<std::vector<double>> fused_in(self_s.size());
  for (std::size_t i = 0; i < self_s.size(); ++i) {
    fused_in[i] = self_s[i];
    fused_in[i].insert(fused_in[i].end(), cross_ts[i].begin(), cross_ts[i].end());
  }
  const auto fused_s = matmul_plain(fused_in, reduce);

  std::vector<std::vector<double>> all_tokens = self_t;
  all_tokens.insert(all_tokens.end(), fused_s.begin(), fused_s.end());
  const auto projected = matmul_plain(all_tokens, out_proj);

  std::vector<std::vector<double>> out_t(template_tokens.size());
  std::vector<std::vector<double>> out_s(search_tokens.size());
  for (std::size_t i = 0; i < template_tokens.size(); ++i) {
    out_t[i].resize(template_tokens[i].size());
    for (std::size_t c = 0; c < template_tokens[i].size(); ++c) {
      out_t[i][c] = template_tokens[i][c] + projected[i][c];
    }
  }
  for (std::size_t i = 0; i < search_tokens.size(); ++i) {
    out_s[i].resize(search_tokens[i].size());
    for (std::size_t c = 0; c < search_tokens[i].size(); ++c) {
      out_s[i][c] = search_tokens[i][c] + projected[template_tokens.size() + i][c];
    }
  }
  return {out_t, out_s};
}

}  // namespace evitrack::reference
