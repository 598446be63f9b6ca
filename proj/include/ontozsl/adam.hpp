#pragma once

#include <cmath>
#include <vector>

#include "ontozsl/tensor.hpp"

namespace ontozsl {

struct AdamState {
  std::vector<Tensor> m, v;
  long t = 0;
};

// Standard Adam with bias correction. State is lazily sized on first step.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

  void step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
            AdamState& state) const {
    require(params.size() == grads.size(), "adam: params/grads count mismatch");
    if (state.m.empty()) {
      for (const Tensor* p : params) {
        state.m.emplace_back(p->rows(), p->cols(), 0.0);
        state.v.emplace_back(p->rows(), p->cols(), 0.0);
      }
    }
    require(state.m.size() == params.size(), "adam: state size mismatch");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(state.t));
    for (size_t i = 0; i < params.size(); ++i) {
      Tensor& p = *params[i];
      const Tensor& g = grads[i];
      require(p.same_shape(g) && p.same_shape(state.m[i]), "adam: shape mismatch");
      Tensor& m = state.m[i];
      Tensor& v = state.v[i];
      for (long k = 0; k < p.size(); ++k) {
        m[k] = beta1_ * m[k] + (1.0 - beta1_) * g[k];
        v[k] = beta2_ * v[k] + (1.0 - beta2_) * g[k] * g[k];
        const double mhat = m[k] / bc1;
        const double vhat = v[k] / bc2;
        p[k] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }

 private:
  double lr_, beta1_, beta2_, eps_;
};

}  // namespace ontozsl
