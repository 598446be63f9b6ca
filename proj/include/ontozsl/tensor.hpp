#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ontozsl/error.hpp"

namespace ontozsl {

// Dense row-major 2-D tensor of doubles. Scalars are 1x1, row vectors 1xn.
// 64-bit storage throughout; 32-bit only appears in checkpoint files.
class Tensor {
 public:
  Tensor() : rows_(0), cols_(0) {}
  Tensor(long rows, long cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows * cols), fill) {
    require(rows > 0 && cols > 0, "tensor dimensions must be positive");
  }
  Tensor(long rows, long cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(rows > 0 && cols > 0, "tensor dimensions must be positive");
    require(static_cast<size_t>(rows * cols) == data_.size(),
            "tensor data length does not match shape");
  }

  static Tensor scalar(double v) { return Tensor(1, 1, {v}); }
  static Tensor row(std::vector<double> v) {
    long n = static_cast<long>(v.size());
    return Tensor(1, n, std::move(v));
  }

  long rows() const { return rows_; }
  long cols() const { return cols_; }
  long size() const { return rows_ * cols_; }
  std::vector<long> shape() const { return {rows_, cols_}; }
  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  double& at(long r, long c) { return data_[static_cast<size_t>(r * cols_ + c)]; }
  double at(long r, long c) const { return data_[static_cast<size_t>(r * cols_ + c)]; }
  double& operator[](long i) { return data_[static_cast<size_t>(i)]; }
  double operator[](long i) const { return data_[static_cast<size_t>(i)]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const std::vector<double>& vec() const { return data_; }

  bool empty() const { return data_.empty(); }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }
  void check_finite(const char* where) const {
    if (!all_finite()) throw Error(std::string("non-finite value in ") + where);
  }

  double l2_norm() const {
    double s = 0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }

 private:
  long rows_, cols_;
  std::vector<double> data_;
};

inline double dot(const Tensor& a, const Tensor& b) {
  require(a.size() == b.size(), "dot: size mismatch");
  double s = 0;
  for (long i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double cosine(const Tensor& a, const Tensor& b) {
  double na = a.l2_norm(), nb = b.l2_norm();
  return dot(a, b) / (na * nb + 1e-12);
}

}  // namespace ontozsl
