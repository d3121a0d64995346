#include "evitrack/rdm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "evitrack/rng.hpp"

namespace evitrack {

namespace {

// Stream tags for weight initialization, one per parameter group. Appending
// new groups at the end keeps existing draws stable.
enum WeightStream : std::uint64_t {
  kWqT = 1,
  kWkT = 2,
  kWvT = 3,
  kWqS = 4,
  kWkS = 5,
  kWvS = 6,
  kDepthwise = 7,
  kReduce = 8,
  kOutProj = 9,
};

Mat random_matrix(int rows, int cols, double scale, std::uint64_t seed,
                  std::uint64_t stream) {
  Mat m(rows, cols);
  Rng rng = derive_stream(seed, stream);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      m(r, c) = rng.uniform(-1.0, 1.0) * scale;
    }
  }
  return m;
}

int grid_side(int token_count, const char* what) {
  const int side = static_cast<int>(std::lround(std::sqrt(
      static_cast<double>(token_count))));
  if (side * side != token_count) {
    throw std::invalid_argument(std::string(what) + " token count " +
                                std::to_string(token_count) +
                                " is not a perfect square");
  }
  return side;
}

// Per-channel 3x3 convolution over the square token grid, zero padded,
// stride 1. Token t sits at grid cell (t / side, t % side).
Mat depthwise_mix(const Mat& tokens,
                  const std::vector<std::array<double, 9>>& kernels,
                  const char* what) {
  const int side = grid_side(tokens.rows(), what);
  const int d = tokens.cols();
  Mat out(tokens.rows(), d);
  for (int gy = 0; gy < side; ++gy) {
    for (int gx = 0; gx < side; ++gx) {
      const int t = gy * side + gx;
      for (int c = 0; c < d; ++c) {
        double acc = 0.0;
        for (int ky = -1; ky <= 1; ++ky) {
          const int ny = gy + ky;
          if (ny < 0 || ny >= side) continue;
          for (int kx = -1; kx <= 1; ++kx) {
            const int nx = gx + kx;
            if (nx < 0 || nx >= side) continue;
            acc += kernels[static_cast<std::size_t>(c)]
                          [static_cast<std::size_t>((ky + 1) * 3 + (kx + 1))] *
                   tokens(ny * side + nx, c);
          }
        }
        out(t, c) = acc;
      }
    }
  }
  return out;
}

void require_square(const Mat& m, int dim, const char* name) {
  if (m.rows() != dim || m.cols() != dim) {
    throw std::invalid_argument(std::string("RdmWeights: ") + name +
                                " must be " + std::to_string(dim) + "x" +
                                std::to_string(dim));
  }
}

}  // namespace

void validate_tokens(const TokenMatrix& tm) {
  if (tm.tokens.rows() < 1 || tm.tokens.cols() < 1) {
    throw std::invalid_argument("TokenMatrix: need at least 1 token and 1 channel");
  }
  if (!all_finite(tm.tokens)) {
    throw std::invalid_argument("TokenMatrix: non-finite entries");
  }
}

Mat attention_weights(const Mat& q, const Mat& k) {
  if (q.cols() != k.cols()) {
    throw std::invalid_argument(
        "attention_weights: query/key channel mismatch (" +
        std::to_string(q.cols()) + " vs " + std::to_string(k.cols()) + ")");
  }
  if (q.rows() < 1 || k.rows() < 1 || q.cols() < 1) {
    throw std::invalid_argument("attention_weights: empty operand");
  }
  Mat logits = matmul_transposed(q, k);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  logits = scale(logits, inv_sqrt_d);
  softmax_rows(logits);
  return logits;
}

Mat scaled_attention(const Mat& q, const Mat& k, const Mat& v) {
  if (k.rows() != v.rows()) {
    throw std::invalid_argument(
        "scaled_attention: key/value row mismatch (" +
        std::to_string(k.rows()) + " vs " + std::to_string(v.rows()) + ")");
  }
  return matmul(attention_weights(q, k), v);
}

Mat cross_attention_ts(const Mat& q_s, const Mat& k_t, const Mat& k_s,
                       const Mat& v_t, const Mat& v_s) {
  if (k_t.rows() != v_t.rows()) {
    throw std::invalid_argument("cross_attention_ts: template key/value row mismatch");
  }
  if (k_t.rows() > 0 && k_t.cols() != k_s.cols()) {
    throw std::invalid_argument(
        "cross_attention_ts: template/search channel mismatch (" +
        std::to_string(k_t.cols()) + " vs " + std::to_string(k_s.cols()) + ")");
  }
  return scaled_attention(q_s, vcat(k_t, k_s), vcat(v_t, v_s));
}

RdmWeights RdmWeights::random(int dim, std::uint64_t seed) {
  if (dim < 1) {
    throw std::invalid_argument("RdmWeights::random: dim must be >= 1");
  }
  const double s = 1.0 / std::sqrt(static_cast<double>(dim));
  RdmWeights w;
  w.dim = dim;
  w.wq_t = random_matrix(dim, dim, s, seed, kWqT);
  w.wk_t = random_matrix(dim, dim, s, seed, kWkT);
  w.wv_t = random_matrix(dim, dim, s, seed, kWvT);
  w.wq_s = random_matrix(dim, dim, s, seed, kWqS);
  w.wk_s = random_matrix(dim, dim, s, seed, kWkS);
  w.wv_s = random_matrix(dim, dim, s, seed, kWvS);
  Rng rng = derive_stream(seed, kDepthwise);
  w.depthwise.resize(static_cast<std::size_t>(dim));
  for (auto& kernel : w.depthwise) {
    for (double& tap : kernel) tap = rng.uniform(-1.0, 1.0) * s;
  }
  w.reduce = random_matrix(2 * dim, dim, s, seed, kReduce);
  w.out_proj = random_matrix(dim, dim, s, seed, kOutProj);
  return w;
}

void RdmWeights::set_depthwise_identity() {
  for (auto& kernel : depthwise) {
    kernel.fill(0.0);
    kernel[4] = 1.0;
  }
}

void RdmWeights::validate() const {
  if (dim < 1) {
    throw std::invalid_argument("RdmWeights: dim must be >= 1");
  }
  require_square(wq_t, dim, "wq_t");
  require_square(wk_t, dim, "wk_t");
  require_square(wv_t, dim, "wv_t");
  require_square(wq_s, dim, "wq_s");
  require_square(wk_s, dim, "wk_s");
  require_square(wv_s, dim, "wv_s");
  if (depthwise.size() != static_cast<std::size_t>(dim)) {
    throw std::invalid_argument("RdmWeights: need one depthwise kernel per channel");
  }
  if (reduce.rows() != 2 * dim || reduce.cols() != dim) {
    throw std::invalid_argument("RdmWeights: reduce must be 2d x d");
  }
  require_square(out_proj, dim, "out_proj");
}

std::pair<TokenMatrix, TokenMatrix> rdm_forward(const TokenMatrix& tmpl,
                                                const TokenMatrix& search,
                                                const RdmWeights& weights) {
  validate_tokens(tmpl);
  validate_tokens(search);
  weights.validate();
  if (tmpl.tokens.cols() != weights.dim || search.tokens.cols() != weights.dim) {
    throw std::invalid_argument(
        "rdm_forward: token channel count does not match weights");
  }

  // Local spatial mixing on each stream's square grid.
  const Mat mixed_t = depthwise_mix(tmpl.tokens, weights.depthwise, "template");
  const Mat mixed_s = depthwise_mix(search.tokens, weights.depthwise, "search");

  const Mat q_t = matmul(mixed_t, weights.wq_t);
  const Mat k_t = matmul(mixed_t, weights.wk_t);
  const Mat v_t = matmul(mixed_t, weights.wv_t);
  const Mat q_s = matmul(mixed_s, weights.wq_s);
  const Mat k_s = matmul(mixed_s, weights.wk_s);
  const Mat v_s = matmul(mixed_s, weights.wv_s);

  const Mat self_t = scaled_attention(q_t, k_t, v_t);
  const Mat self_s = scaled_attention(q_s, k_s, v_s);
  const Mat cross_ts = cross_attention_ts(q_s, k_t, k_s, v_t, v_s);

  // The two search-side feature sets stay separable until this reduction.
  const Mat fused_s = matmul(hcat(self_s, cross_ts), weights.reduce);

  // One projection over the concatenated token list, then the residual path
  // carries the untouched inputs through.
  const Mat projected = matmul(vcat(self_t, fused_s), weights.out_proj);
  Mat out_t(tmpl.tokens.rows(), weights.dim);
  Mat out_s(search.tokens.rows(), weights.dim);
  for (int r = 0; r < out_t.rows(); ++r) {
    for (int c = 0; c < weights.dim; ++c) {
      out_t(r, c) = tmpl.tokens(r, c) + projected(r, c);
    }
  }
  const int offset = out_t.rows();
  for (int r = 0; r < out_s.rows(); ++r) {
    for (int c = 0; c < weights.dim; ++c) {
      out_s(r, c) = search.tokens(r, c) + projected(offset + r, c);
    }
  }
  return {TokenMatrix{std::move(out_t), TokenOrigin::Template},
          TokenMatrix{std::move(out_s), TokenOrigin::Search}};
}

std::vector<StageShape> stage_shapes(int template_side_px, int search_side_px,
                                     int base_channels) {
  if (template_side_px < 16 || template_side_px % 16 != 0 ||
      search_side_px < 16 || search_side_px % 16 != 0) {
    throw std::invalid_argument(
        "stage_shapes: pixel sides must be positive multiples of 16");
  }
  if (base_channels < 1) {
    throw std::invalid_argument("stage_shapes: base_channels must be >= 1");
  }
  // Grid reductions /4, /8, /16 with channel growth C, 3C, 6C.
  const int divisors[3] = {4, 8, 16};
  const int multipliers[3] = {1, 3, 6};
  std::vector<StageShape> stages;
  stages.reserve(3);
  for (int s = 0; s < 3; ++s) {
    stages.push_back(StageShape{template_side_px / divisors[s],
                                search_side_px / divisors[s],
                                base_channels * multipliers[s]});
  }
  return stages;
}

}  // namespace evitrack
