#include "ontozsl/softmax.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ontozsl/adam.hpp"
#include "ontozsl/graph.hpp"
#include "ontozsl/rng.hpp"

namespace ontozsl {

long SoftmaxClassifier::class_index(const std::string& label) const {
  auto it = std::lower_bound(classes.begin(), classes.end(), label);
  require(it != classes.end() && *it == label, "label outside classifier classes: " + label);
  return it - classes.begin();
}

Tensor SoftmaxClassifier::logits(const Tensor& x) const {
  require(x.cols() == layer.in_dim(), "classifier: feature dimension mismatch");
  Tensor out(x.rows(), layer.out_dim());
  for (long r = 0; r < x.rows(); ++r)
    for (long c = 0; c < layer.out_dim(); ++c) {
      double s = layer.b[c];
      for (long k = 0; k < x.cols(); ++k) s += x.at(r, k) * layer.W.at(k, c);
      out.at(r, c) = s;
    }
  return out;
}

long SoftmaxClassifier::predict_row(const Tensor& x, long row) const {
  Tensor single(1, x.cols());
  for (long c = 0; c < x.cols(); ++c) single[c] = x.at(row, c);
  Tensor lg = logits(single);
  long best = 0;
  for (long c = 1; c < lg.cols(); ++c)
    if (lg[c] > lg[best]) best = c;  // strict: ties keep the lowest class id
  return best;
}

std::vector<std::string> SoftmaxClassifier::predict(const Tensor& x) const {
  std::vector<std::string> out;
  out.reserve(static_cast<size_t>(x.rows()));
  for (long r = 0; r < x.rows(); ++r)
    out.push_back(classes[static_cast<size_t>(predict_row(x, r))]);
  return out;
}

double SoftmaxClassifier::mean_nll(const Tensor& x, const std::vector<std::string>& labels) const {
  require(x.rows() == static_cast<long>(labels.size()), "classifier: label count mismatch");
  Tensor lg = logits(x);
  double total = 0;
  for (long r = 0; r < x.rows(); ++r) {
    double mx = lg.at(r, 0);
    for (long c = 1; c < lg.cols(); ++c) mx = std::max(mx, lg.at(r, c));
    double lse = 0;
    for (long c = 0; c < lg.cols(); ++c) lse += std::exp(lg.at(r, c) - mx);
    lse = mx + std::log(lse);
    total += lse - lg.at(r, class_index(labels[static_cast<size_t>(r)]));
  }
  return total / static_cast<double>(x.rows());
}

SoftmaxClassifier train_softmax(const Tensor& features, const std::vector<std::string>& labels,
                                const std::vector<std::string>& class_set,
                                const SoftmaxConfig& config) {
  require(features.rows() == static_cast<long>(labels.size()),
          "train_softmax: label count mismatch");
  SoftmaxClassifier cls;
  cls.classes.assign(class_set.begin(), class_set.end());
  std::sort(cls.classes.begin(), cls.classes.end());
  cls.classes.erase(std::unique(cls.classes.begin(), cls.classes.end()), cls.classes.end());
  require(!cls.classes.empty(), "train_softmax: empty class set");

  std::set<std::string> present(labels.begin(), labels.end());
  for (const std::string& c : cls.classes)
    require(present.count(c), "train_softmax: class has no training rows: " + c);

  std::vector<long> gold;
  gold.reserve(labels.size());
  for (const std::string& l : labels) gold.push_back(cls.class_index(l));

  Rng rng(config.seed);
  cls.layer = Linear{Tensor(features.cols(), static_cast<long>(cls.classes.size()), 0.0),
                     Tensor(1, static_cast<long>(cls.classes.size()), 0.0)};

  Adam opt(config.lr);
  AdamState state;
  std::vector<long> order(static_cast<size_t>(features.rows()));
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<long>(i);

  for (long epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch)) {
      size_t end = std::min(order.size(), start + static_cast<size_t>(config.batch));
      std::vector<long> rows(order.begin() + static_cast<long>(start),
                             order.begin() + static_cast<long>(end));
      std::vector<long> batch_gold;
      batch_gold.reserve(rows.size());
      for (long r : rows) batch_gold.push_back(gold[static_cast<size_t>(r)]);

      Graph g;
      ParamSet ps;
      NodeId x = g.gather_rows(g.constant(features), rows);
      LinearNodes ln = declare_linear(g, cls.layer, ps);
      NodeId loss = softmax_nll(g, apply_linear(g, ln, x), batch_gold);
      auto grads = g.grad(loss, ps.nodes);
      opt.step(ps.tensors, grads, state);
    }
  }
  return cls;
}

}  // namespace ontozsl
