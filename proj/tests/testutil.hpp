#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ontozsl/tensor.hpp"

namespace ontozsl::testutil {

// Fresh scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    dir_ = std::filesystem::temp_directory_path() /
           ("ontozsl_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() { std::filesystem::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

 private:
  std::filesystem::path dir_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  f << content;
}

inline std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

// Scaled relative error: behaves like absolute error below 1 and relative
// error above.
inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// Central finite differences of f over every coordinate of theta.
template <typename F>
std::vector<Tensor> fd_grad(F&& f, std::vector<Tensor> theta, double h = 1e-5) {
  std::vector<Tensor> out;
  out.reserve(theta.size());
  for (size_t i = 0; i < theta.size(); ++i) {
    Tensor gi(theta[i].rows(), theta[i].cols(), 0.0);
    for (long k = 0; k < theta[i].size(); ++k) {
      const double orig = theta[i][k];
      theta[i][k] = orig + h;
      const double fp = f(theta);
      theta[i][k] = orig - h;
      const double fm = f(theta);
      theta[i][k] = orig;
      gi[k] = (fp - fm) / (2.0 * h);
    }
    out.push_back(std::move(gi));
  }
  return out;
}

inline double max_rel_err(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    for (long k = 0; k < a[i].size(); ++k) worst = std::max(worst, rel_err(a[i][k], b[i][k]));
  return worst;
}

// Checks analytic gradients of a scalar-valued builder against central
// finite differences. The builder maps parameter tensors to a loss value
// via a fresh graph each call; analytic is the grad() result at theta.
template <typename F>
double fd_check(F&& f, const std::vector<Tensor>& theta, const std::vector<Tensor>& analytic,
                double h = 1e-5) {
  return max_rel_err(analytic, fd_grad(f, theta, h));
}

}  // namespace ontozsl::testutil
