#pragma once

#include <map>
#include <string>
#include <vector>

#include "ontozsl/gan.hpp"
#include "ontozsl/io.hpp"
#include "ontozsl/softmax.hpp"
#include "ontozsl/tensor.hpp"

namespace ontozsl {

// Instance features with class labels and the seen/unseen class split.
// Unseen classes never have training rows.
struct FeatureDataset {
  Tensor train_x;
  std::vector<std::string> train_labels;
  Tensor test_x;
  std::vector<std::string> test_labels;
  std::map<std::string, bool> split;  // class id -> seen?

  std::vector<std::string> seen_classes() const;
  std::vector<std::string> unseen_classes() const;
  void validate() const;
};

FeatureDataset load_feature_dataset(const std::string& train_features,
                                    const std::string& train_labels,
                                    const std::string& test_features,
                                    const std::string& test_labels, const std::string& split);

struct EvalReport {
  std::string task;            // imgc | kgc
  std::string mode;            // standard | generalized | tail_ranking
  std::string ablation = "all";
  uint64_t seed = 0;
  std::map<std::string, double> metrics;
  std::map<std::string, double> per_class_accuracy;
  std::vector<std::string> empty_classes;  // classes with no test rows
};

// Unweighted mean of per-class accuracies. Classes without test rows are
// excluded from the mean and reported through empty_out.
double macro_accuracy(const std::vector<std::string>& predictions,
                      const std::vector<std::string>& labels,
                      const std::vector<std::string>& class_set,
                      std::map<std::string, double>* per_class_out = nullptr,
                      std::vector<std::string>* empty_out = nullptr);

double harmonic_mean(double acc_s, double acc_u);

struct ZslConfig {
  std::string mode = "standard";  // standard | generalized
  long n_syn = 300;               // synthesized features per unseen class
  SoftmaxConfig classifier;
  uint64_t seed = 0;
};

// Synthesizes unseen-class features with the trained generator, trains the
// final softmax classifier, and scores macro accuracy (plus acc_s/acc_u/H
// in the generalized setting).
EvalReport zsl_evaluate(const FeatureDataset& data, const GanModel& gan,
                        const io::EmbeddingTable& embeddings, const ZslConfig& config);

}  // namespace ontozsl
