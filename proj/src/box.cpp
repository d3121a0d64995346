#include "evitrack/box.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evitrack {

bool box_is_valid(const BoundingBox& b) {
  return std::isfinite(b.x) && std::isfinite(b.y) && std::isfinite(b.w) &&
         std::isfinite(b.h) && b.w >= 0.0 && b.h >= 0.0;
}

void validate_box(const BoundingBox& b) {
  if (!box_is_valid(b)) throw std::invalid_argument("invalid bounding box: coordinates must be finite, sizes nonnegative");
}

double box_area(const BoundingBox& b) { return b.w * b.h; }

double iou(const BoundingBox& a, const BoundingBox& b) {
  validate_box(a);
  validate_box(b);
  const double ax2 = a.x + a.w, ay2 = a.y + a.h;
  const double bx2 = b.x + b.w, by2 = b.y + b.h;
  const double iw = std::max(0.0, std::min(ax2, bx2) - std::max(a.x, b.x));
  const double ih = std::max(0.0, std::min(ay2, by2) - std::max(a.y, b.y));
  const double inter = iw * ih;
  // Member areas use the same corner arithmetic as the intersection, so a
  // box overlaps itself with ratio exactly 1 and the ratio never rounds
  // above 1, even when x + w is inexact.
  const double area_a = (ax2 - a.x) * (ay2 - a.y);
  const double area_b = (bx2 - b.x) * (by2 - b.y);
  const double uni = area_a + area_b - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

namespace {

// Scale applied to each parameter's L1 difference. Normalized coordinates
// divide x/w by the frame width and y/h by the height.
std::array<double, 4> l1_scales(const std::optional<FrameSize>& frame) {
  if (!frame) return {1.0, 1.0, 1.0, 1.0};
  if (frame->width <= 0.0 || frame->height <= 0.0)
    throw std::invalid_argument("frame size must be positive");
  return {1.0 / frame->width, 1.0 / frame->height, 1.0 / frame->width, 1.0 / frame->height};
}

void validate_loss_inputs(const BoundingBox& pred, const BoundingBox& gt,
                          const LossWeights& weights) {
  validate_box(pred);
  validate_box(gt);
  if (!(std::isfinite(weights.lambda_iou) && std::isfinite(weights.lambda_l1)) ||
      weights.lambda_iou < 0.0 || weights.lambda_l1 < 0.0)
    throw std::invalid_argument("loss weights must be finite and nonnegative");
  if (box_area(gt) <= 0.0)
    throw std::invalid_argument("ground-truth box must have positive area");
}

}  // namespace

double box_regression_loss(const BoundingBox& pred, const BoundingBox& gt,
                           const LossWeights& weights, std::optional<FrameSize> frame) {
  validate_loss_inputs(pred, gt, weights);
  const auto scales = l1_scales(frame);
  const std::array<double, 4> diffs = {pred.x - gt.x, pred.y - gt.y, pred.w - gt.w,
                                       pred.h - gt.h};
  double l1 = 0.0;
  for (int i = 0; i < 4; ++i) l1 += std::abs(diffs[i]) * scales[i];
  l1 /= 4.0;
  return weights.lambda_iou * (1.0 - iou(pred, gt)) + weights.lambda_l1 * l1;
}

BoxLossGrad box_regression_loss_grad(const BoundingBox& pred, const BoundingBox& gt,
                                     const LossWeights& weights,
                                     std::optional<FrameSize> frame) {
  validate_loss_inputs(pred, gt, weights);
  const auto scales = l1_scales(frame);

  BoxLossGrad out;

  const double pa1 = pred.x, pa2 = pred.x + pred.w;
  const double pb1 = pred.y, pb2 = pred.y + pred.h;
  const double ga1 = gt.x, ga2 = gt.x + gt.w;
  const double gb1 = gt.y, gb2 = gt.y + gt.h;

  const double iw_raw = std::min(pa2, ga2) - std::max(pa1, ga1);
  const double ih_raw = std::min(pb2, gb2) - std::max(pb1, gb1);
  const double iw = std::max(0.0, iw_raw);
  const double ih = std::max(0.0, ih_raw);
  const double inter = iw * ih;
  const double area_p = (pa2 - pa1) * (pb2 - pb1);
  const double area_g = (ga2 - ga1) * (gb2 - gb1);
  const double uni = area_p + area_g - inter;

  // Touching edges and corner ties are kinks of the IoU surface; report a
  // one-sided subgradient there and clear the smooth flag.
  if (iw_raw == 0.0 || ih_raw == 0.0) out.smooth = false;
  const bool x_active = iw_raw > 0.0 && ih_raw > 0.0;
  const bool y_active = x_active;
  if (x_active && (pa1 == ga1 || pa2 == ga2 || pb1 == gb1 || pb2 == gb2)) out.smooth = false;

  // d(iw)/d(px, pw), d(ih)/d(py, ph) under the active min/max branches.
  const double sx1 = pa1 >= ga1 ? 1.0 : 0.0;
  const double sx2 = pa2 <= ga2 ? 1.0 : 0.0;
  const double sy1 = pb1 >= gb1 ? 1.0 : 0.0;
  const double sy2 = pb2 <= gb2 ? 1.0 : 0.0;

  const double diw_dx = x_active ? sx2 - sx1 : 0.0;
  const double diw_dw = x_active ? sx2 : 0.0;
  const double dih_dy = y_active ? sy2 - sy1 : 0.0;
  const double dih_dh = y_active ? sy2 : 0.0;

  const std::array<double, 4> d_inter = {diw_dx * ih, dih_dy * iw, diw_dw * ih, dih_dh * iw};
  const std::array<double, 4> d_area = {0.0, 0.0, pred.h, pred.w};

  std::array<double, 4> d_iou{};
  if (uni > 0.0) {
    for (int i = 0; i < 4; ++i) {
      const double d_uni = d_area[i] - d_inter[i];
      d_iou[i] = (d_inter[i] * uni - inter * d_uni) / (uni * uni);
    }
  }

  const std::array<double, 4> diffs = {pred.x - gt.x, pred.y - gt.y, pred.w - gt.w,
                                       pred.h - gt.h};
  for (int i = 0; i < 4; ++i) {
    if (diffs[i] == 0.0) out.smooth = false;
    const double sign = diffs[i] > 0.0 ? 1.0 : (diffs[i] < 0.0 ? -1.0 : 0.0);
    out.d[i] = -weights.lambda_iou * d_iou[i] +
               weights.lambda_l1 * 0.25 * sign * scales[i];
  }
  return out;
}

}  // namespace evitrack
