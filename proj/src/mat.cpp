#include "evitrack/mat.hpp"

#include <algorithm>
#include <cmath>

namespace evitrack {

Mat::Mat(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("Mat: negative dimension");
}

Mat Mat::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return Mat();
  Mat m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int r = 0; r < m.rows(); ++r) {
    if (static_cast<int>(rows[r].size()) != m.cols())
      throw std::invalid_argument("Mat::from_rows: ragged rows");
    for (int c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
  Mat out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Mat matmul_transposed(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_transposed: channel dimensions differ");
  Mat out(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < b.rows(); ++j) {
      double acc = 0.0;
      for (int k = 0; k < a.cols(); ++k) acc += a(i, k) * b(j, k);
      out(i, j) = acc;
    }
  }
  return out;
}

Mat vcat(const Mat& a, const Mat& b) {
  if (a.rows() == 0) return b;
  if (b.rows() == 0) return a;
  if (a.cols() != b.cols()) throw std::invalid_argument("vcat: column counts differ");
  Mat out(a.rows() + b.rows(), a.cols());
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c) out(r, c) = a(r, c);
  for (int r = 0; r < b.rows(); ++r)
    for (int c = 0; c < b.cols(); ++c) out(a.rows() + r, c) = b(r, c);
  return out;
}

Mat hcat(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("hcat: row counts differ");
  Mat out(a.rows(), a.cols() + b.cols());
  for (int r = 0; r < a.rows(); ++r) {
    for (int c = 0; c < a.cols(); ++c) out(r, c) = a(r, c);
    for (int c = 0; c < b.cols(); ++c) out(r, a.cols() + c) = b(r, c);
  }
  return out;
}

Mat add(const Mat& a, const Mat& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("add: shapes differ");
  Mat out(a.rows(), a.cols());
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c) out(r, c) = a(r, c) + b(r, c);
  return out;
}

Mat scale(const Mat& a, double s) {
  Mat out(a.rows(), a.cols());
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c) out(r, c) = a(r, c) * s;
  return out;
}

void softmax_rows(Mat& m) {
  for (int r = 0; r < m.rows(); ++r) {
    double mx = m(r, 0);
    for (int c = 1; c < m.cols(); ++c) mx = std::max(mx, m(r, c));
    double sum = 0.0;
    for (int c = 0; c < m.cols(); ++c) {
      const double e = std::exp(m(r, c) - mx);
      m(r, c) = e;
      sum += e;
    }
    for (int c = 0; c < m.cols(); ++c) m(r, c) /= sum;
  }
}

bool all_finite(const Mat& m) {
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c)
      if (!std::isfinite(m(r, c))) return false;
  return true;
}

}  // namespace evitrack
