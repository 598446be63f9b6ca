#include "ontozsl/imgc.hpp"

#include <algorithm>
#include <set>

namespace ontozsl {

std::vector<std::string> FeatureDataset::seen_classes() const {
  std::vector<std::string> out;
  for (const auto& [c, seen] : split)
    if (seen) out.push_back(c);
  return out;
}

std::vector<std::string> FeatureDataset::unseen_classes() const {
  std::vector<std::string> out;
  for (const auto& [c, seen] : split)
    if (!seen) out.push_back(c);
  return out;
}

void FeatureDataset::validate() const {
  require(train_x.rows() == static_cast<long>(train_labels.size()),
          "dataset: train label count mismatch");
  require(test_x.rows() == static_cast<long>(test_labels.size()),
          "dataset: test label count mismatch");
  require(train_x.cols() == test_x.cols(), "dataset: feature dimension mismatch");
  for (const std::string& l : train_labels) {
    auto it = split.find(l);
    require(it != split.end(), "dataset: train label missing from split: " + l);
    require(it->second, "dataset: unseen class has training rows: " + l);
  }
  for (const std::string& l : test_labels)
    require(split.count(l), "dataset: test label missing from split: " + l);
}

FeatureDataset load_feature_dataset(const std::string& train_features,
                                    const std::string& train_labels,
                                    const std::string& test_features,
                                    const std::string& test_labels, const std::string& split) {
  FeatureDataset d;
  d.train_x = io::read_features(train_features);
  d.train_labels = io::read_labels(train_labels);
  d.test_x = io::read_features(test_features);
  d.test_labels = io::read_labels(test_labels);
  d.split = io::read_split(split);
  d.validate();
  return d;
}

double macro_accuracy(const std::vector<std::string>& predictions,
                      const std::vector<std::string>& labels,
                      const std::vector<std::string>& class_set,
                      std::map<std::string, double>* per_class_out,
                      std::vector<std::string>* empty_out) {
  require(!class_set.empty(), "macro_accuracy: empty class set");
  require(predictions.size() == labels.size(), "macro_accuracy: prediction count mismatch");
  std::set<std::string> classes(class_set.begin(), class_set.end());
  for (const std::string& l : labels)
    require(classes.count(l), "macro_accuracy: label outside class set: " + l);

  std::map<std::string, long> total, correct;
  for (size_t i = 0; i < labels.size(); ++i) {
    ++total[labels[i]];
    if (predictions[i] == labels[i]) ++correct[labels[i]];
  }

  double sum = 0;
  long counted = 0;
  for (const std::string& c : classes) {
    auto it = total.find(c);
    if (it == total.end()) {
      if (empty_out) empty_out->push_back(c);
      continue;
    }
    double acc = static_cast<double>(correct[c]) / static_cast<double>(it->second);
    if (per_class_out) (*per_class_out)[c] = acc;
    sum += acc;
    ++counted;
  }
  require(counted > 0, "macro_accuracy: no class has test rows");
  return sum / static_cast<double>(counted);
}

double harmonic_mean(double acc_s, double acc_u) {
  if (acc_s + acc_u <= 0.0) return 0.0;
  return 2.0 * acc_s * acc_u / (acc_s + acc_u);
}

namespace {

// per-class synthesis seed, decorrelated across classes but reproducible
uint64_t class_seed(uint64_t base, long class_idx) {
  return base * 1000003u + 17u * static_cast<uint64_t>(class_idx) + 1u;
}

}  // namespace

EvalReport zsl_evaluate(const FeatureDataset& data, const GanModel& gan,
                        const io::EmbeddingTable& embeddings, const ZslConfig& config) {
  data.validate();
  require(config.mode == "standard" || config.mode == "generalized",
          "zsl_evaluate: unknown mode: " + config.mode);
  const bool generalized = config.mode == "generalized";

  std::vector<std::string> unseen = data.unseen_classes();
  std::vector<std::string> seen = data.seen_classes();
  require(!unseen.empty(), "zsl_evaluate: no unseen classes in split");
  for (const std::string& c : unseen)
    require(embeddings.count(c), "zsl_evaluate: missing embedding for class: " + c);

  bool has_unseen_rows = false;
  for (const std::string& l : data.test_labels)
    if (!data.split.at(l)) has_unseen_rows = true;
  require(has_unseen_rows, "zsl_evaluate: empty unseen test split");

  // synthesize per-unseen-class training features
  const long n_syn = config.n_syn;
  long rows = n_syn * static_cast<long>(unseen.size());
  if (generalized) rows += data.train_x.rows();
  Tensor train(rows, data.train_x.cols());
  std::vector<std::string> train_labels;
  train_labels.reserve(static_cast<size_t>(rows));
  long at = 0;
  for (size_t u = 0; u < unseen.size(); ++u) {
    Tensor synth = generate(gan, embeddings.at(unseen[u]), n_syn,
                            class_seed(config.seed, static_cast<long>(u)));
    for (long r = 0; r < n_syn; ++r, ++at) {
      for (long c = 0; c < train.cols(); ++c) train.at(at, c) = synth.at(r, c);
      train_labels.push_back(unseen[u]);
    }
  }
  if (generalized) {
    for (long r = 0; r < data.train_x.rows(); ++r, ++at) {
      for (long c = 0; c < train.cols(); ++c) train.at(at, c) = data.train_x.at(r, c);
      train_labels.push_back(data.train_labels[static_cast<size_t>(r)]);
    }
  }

  // candidate label set: Y_u in standard mode, Y_s union Y_u in generalized
  std::vector<std::string> candidates = unseen;
  if (generalized) candidates.insert(candidates.end(), seen.begin(), seen.end());
  std::sort(candidates.begin(), candidates.end());

  SoftmaxConfig cls_cfg = config.classifier;
  cls_cfg.seed = config.seed;
  SoftmaxClassifier cls = train_softmax(train, train_labels, candidates, cls_cfg);

  // evaluated rows: unseen-class rows in standard mode, all rows otherwise
  std::vector<long> eval_rows;
  for (long r = 0; r < data.test_x.rows(); ++r) {
    bool is_seen = data.split.at(data.test_labels[static_cast<size_t>(r)]);
    if (generalized || !is_seen) eval_rows.push_back(r);
  }
  Tensor eval_x(static_cast<long>(eval_rows.size()), data.test_x.cols());
  std::vector<std::string> eval_labels;
  for (size_t i = 0; i < eval_rows.size(); ++i) {
    for (long c = 0; c < data.test_x.cols(); ++c)
      eval_x.at(static_cast<long>(i), c) = data.test_x.at(eval_rows[i], c);
    eval_labels.push_back(data.test_labels[static_cast<size_t>(eval_rows[i])]);
  }
  std::vector<std::string> preds = cls.predict(eval_x);

  EvalReport report;
  report.task = "imgc";
  report.mode = config.mode;
  report.seed = config.seed;
  if (!generalized) {
    report.metrics["acc"] = macro_accuracy(preds, eval_labels, unseen,
                                           &report.per_class_accuracy, &report.empty_classes);
  } else {
    // split the evaluated rows by class side and average per side
    std::vector<std::string> preds_s, labels_s, preds_u, labels_u;
    for (size_t i = 0; i < eval_labels.size(); ++i) {
      if (data.split.at(eval_labels[i])) {
        preds_s.push_back(preds[i]);
        labels_s.push_back(eval_labels[i]);
      } else {
        preds_u.push_back(preds[i]);
        labels_u.push_back(eval_labels[i]);
      }
    }
    double acc_s = labels_s.empty() ? 0.0
                                    : macro_accuracy(preds_s, labels_s, seen,
                                                     &report.per_class_accuracy,
                                                     &report.empty_classes);
    double acc_u = macro_accuracy(preds_u, labels_u, unseen, &report.per_class_accuracy,
                                  &report.empty_classes);
    report.metrics["acc_s"] = acc_s;
    report.metrics["acc_u"] = acc_u;
    report.metrics["H"] = harmonic_mean(acc_s, acc_u);
  }
  return report;
}

}  // namespace ontozsl
