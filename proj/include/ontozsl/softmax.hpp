#pragma once

#include <string>
#include <vector>

#include "ontozsl/nn.hpp"
#include "ontozsl/tensor.hpp"

namespace ontozsl {

struct SoftmaxConfig {
  long epochs = 100;
  long batch = 128;
  double lr = 0.001;
  uint64_t seed = 0;
};

// Linear softmax classifier, P(y|x) = exp(theta_y^T x) / sum_i exp(theta_i^T x).
// Classes are kept sorted; argmax ties resolve to the lowest class id.
struct SoftmaxClassifier {
  std::vector<std::string> classes;
  Linear layer;

  long class_index(const std::string& label) const;
  Tensor logits(const Tensor& x) const;
  long predict_row(const Tensor& x, long row) const;
  std::vector<std::string> predict(const Tensor& x) const;
  double mean_nll(const Tensor& x, const std::vector<std::string>& labels) const;
};

// Minimizes mean negative log-likelihood with Adam; deterministic per seed.
SoftmaxClassifier train_softmax(const Tensor& features, const std::vector<std::string>& labels,
                                const std::vector<std::string>& class_set,
                                const SoftmaxConfig& config);

}  // namespace ontozsl
