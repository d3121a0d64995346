#pragma once

#include <array>
#include <optional>

namespace evitrack {

// Axis-aligned rectangle in pixel units, top-left origin. Zero width/height
// is permitted as a degenerate value; corner form is derived, never stored.
struct BoundingBox {
  double x = 0.0;  // left edge
  double y = 0.0;  // top edge
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

bool box_is_valid(const BoundingBox& b);
// Throws std::invalid_argument on non-finite coordinates or negative size.
void validate_box(const BoundingBox& b);
double box_area(const BoundingBox& b);

// Intersection over union in [0, 1]. Two zero-area boxes give 0, not NaN.
double iou(const BoundingBox& a, const BoundingBox& b);

struct LossWeights {
  double lambda_iou = 2.0;
  double lambda_l1 = 5.0;
};

struct FrameSize {
  double width = 0.0;
  double height = 0.0;
};

// lambda_iou * (1 - IoU) + lambda_l1 * mean |pred - gt| over the four box
// parameters. With a frame size, x/w differences are divided by the width and
// y/h differences by the height; otherwise raw pixels.
double box_regression_loss(const BoundingBox& pred, const BoundingBox& gt,
                           const LossWeights& weights,
                           std::optional<FrameSize> frame = std::nullopt);

struct BoxLossGrad {
  std::array<double, 4> d{};  // partials w.r.t. pred (x, y, w, h)
  bool smooth = true;         // false at kinks; d then holds a subgradient
};

BoxLossGrad box_regression_loss_grad(const BoundingBox& pred, const BoundingBox& gt,
                                     const LossWeights& weights,
                                     std::optional<FrameSize> frame = std::nullopt);

}  // namespace evitrack
