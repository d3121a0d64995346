#pragma once

#include <stdexcept>
#include <vector>

namespace evitrack {

// Minimal row-major dense matrix of doubles. Just enough linear algebra for
// the attention block; not a general-purpose library.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols, double fill = 0.0);

  static Mat from_rows(const std::vector<std::vector<double>>& rows);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const Mat& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Mat& a, const Mat& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

Mat matmul(const Mat& a, const Mat& b);
// a * b^T without forming the transpose.
Mat matmul_transposed(const Mat& a, const Mat& b);
// Stack rows of a on top of b; either side may have zero rows.
Mat vcat(const Mat& a, const Mat& b);
// Concatenate along the channel (column) dimension.
Mat hcat(const Mat& a, const Mat& b);
Mat add(const Mat& a, const Mat& b);
Mat scale(const Mat& a, double s);
// Row-wise softmax with max subtraction; logits of magnitude up to ~1e4 stay finite.
void softmax_rows(Mat& m);
bool all_finite(const Mat& m);

}  // namespace evitrack
