#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "evitrack/mat.hpp"

namespace evitrack {

enum class TokenOrigin { Template, Search };

// A flattened feature map: N tokens of d channels each.
struct TokenMatrix {
  Mat tokens;
  TokenOrigin origin = TokenOrigin::Search;
};

// Throws std::invalid_argument unless tokens is non-empty and finite.
void validate_tokens(const TokenMatrix& tm);

// Row-stochastic attention matrix softmax(QKᵀ/√d), shape N_q×N_k.
Mat attention_weights(const Mat& q, const Mat& k);

// softmax(QKᵀ/√d)·V; every output row is a convex combination of V's rows.
Mat scaled_attention(const Mat& q, const Mat& k, const Mat& v);

// Search-query attention over the joint template+search key/value set:
// scaled_attention(Q_s, [K_t;K_s], [V_t;V_s]). K_t and V_t may have zero
// rows, in which case this is exactly self-attention over the search tokens.
Mat cross_attention_ts(const Mat& q_s, const Mat& k_t, const Mat& k_s,
                       const Mat& v_t, const Mat& v_s);

// Weights for one decoupled-attention block. Template and search streams get
// separate Q/K/V projections; the depthwise 3x3 kernels (one per channel,
// shared by both streams) supply local spatial mixing before projection.
struct RdmWeights {
  int dim = 0;
  Mat wq_t, wk_t, wv_t;                          // d×d
  Mat wq_s, wk_s, wv_s;                          // d×d
  std::vector<std::array<double, 9>> depthwise;  // d kernels, row-major 3×3
  Mat reduce;                                    // 2d×d channel reduction
  Mat out_proj;                                  // d×d

  // All entries drawn from U(-1,1)/√d with a fixed derivation per matrix, so
  // the same (dim, seed) pair always reproduces the same block.
  static RdmWeights random(int dim, std::uint64_t seed);

  // Center tap 1, all other taps 0: spatial mixing becomes a no-op so token
  // order carries no positional information.
  void set_depthwise_identity();

  void validate() const;
};

// One block of the decoupled-attention pipeline:
//   reshape each stream to its square grid -> depthwise 3x3 mixing (zero
//   padded) -> Q/K/V projections -> template self-attention; search
//   self-attention and search-over-joint cross-attention -> channel-concat
//   of the two search outputs -> 2d->d reduction -> shared output projection
//   over the concatenated token list -> residual add with the ORIGINAL
//   (pre-mixing) inputs.
// Token counts must be perfect squares. Output shapes equal input shapes.
std::pair<TokenMatrix, TokenMatrix> rdm_forward(const TokenMatrix& tmpl,
                                                const TokenMatrix& search,
                                                const RdmWeights& weights);

struct StageShape {
  int template_side = 0;  // token-grid side, not pixels
  int search_side = 0;
  int channels = 0;

  int token_count() const {
    return template_side * template_side + search_side * search_side;
  }
};

// Three-stage backbone shape arithmetic: grids shrink by /4, /8, /16 from the
// pixel inputs while channels grow C, 3C, 6C. Sides must be divisible by 16.
std::vector<StageShape> stage_shapes(int template_side_px, int search_side_px,
                                     int base_channels);

}  // namespace evitrack
