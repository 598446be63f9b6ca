#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ontozsl/graph.hpp"
#include "ontozsl/io.hpp"
#include "ontozsl/nn.hpp"
#include "ontozsl/rng.hpp"
#include "ontozsl/softmax.hpp"

namespace ontozsl {

struct GanConfig {
  long noise_dim = 100;
  long hidden_g = 4096;
  long hidden_d = 4096;
  double lambda1 = 0.01;  // classification loss weight
  double lambda2 = 5.0;   // pivot regularization weight
  double beta = 10.0;     // gradient penalty weight
  long n_critic = 5;      // critic steps per generator step
  double lr = 0.0001;
  long batch = 64;
  long iters = 2000;  // generator updates
  long val_every = 0; // 0 disables the validation hook
  SoftmaxConfig classifier;
  uint64_t seed = 0;
};

// Conditional generator/critic pair plus the frozen seen-class classifier
// that drives the classification loss. Both networks see the concept
// embedding concatenated to their primary input.
struct GanModel {
  Linear g1, g2;  // [z; o] -> hidden -> feature
  Linear d1, d2;  // [x; o] -> hidden -> scalar critic value
  SoftmaxClassifier classifier;
  long noise_dim = 0;
  long embed_dim = 0;
  long feature_dim = 0;
  double leaky_slope = 0.2;

  std::vector<Tensor> weight_tensors() const;  // checkpoint declaration order
  void load_weight_tensors(const std::vector<Tensor>& ts);
};

// Per-class mean of real features, the pivot targets.
struct ClassStats {
  std::map<std::string, Tensor> mean;
};

ClassStats real_class_means(const Tensor& features, const std::vector<std::string>& labels);

// A conditioned minibatch: row i of features/embeds belongs to classes[i].
struct GanBatch {
  Tensor real_x;   // [B, feature_dim]
  Tensor embeds;   // [B, embed_dim]
  std::vector<std::string> classes;
};

// plain forward pass of the generator, no tape
Tensor generator_forward(const GanModel& model, const Tensor& noise, const Tensor& embeds);
// plain forward pass of the critic
Tensor critic_forward(const GanModel& model, const Tensor& x, const Tensor& embeds);

// n feature rows for one concept embedding; pure in (model, o_i, n, seed)
Tensor generate(const GanModel& model, const Tensor& concept_embedding, long n, uint64_t seed);

// Eq. 9: -E[D(x_hat, o)] + lambda1 * L_cls + lambda2 * L_P over the tape.
// The critic and classifier are frozen; gradients flow to generator params.
NodeId generator_loss_graph(Graph& g, GanModel& model, ParamSet& ps, const GanBatch& batch,
                            const ClassStats& stats, const Tensor& noise, double lambda1,
                            double lambda2);

// Eq. 10: E[D(x,o)] - E[D(x_hat,o)] - beta * E[(||grad_x~ D(x~,o)|| - 1)^2].
// Training ascends this value (descends its negation). eps is one U(0,1)
// draw per sample.
NodeId discriminator_loss_graph(Graph& g, GanModel& model, ParamSet& ps, const GanBatch& real,
                                const Tensor& fake_x, const Tensor& eps, double beta);

// convenience wrappers matching the loss contracts; noise/eps drawn from rng
double loss_G(GanModel& model, const GanBatch& batch, const ClassStats& stats, double lambda1,
              double lambda2, Rng& rng);
double loss_D(GanModel& model, const GanBatch& real, const Tensor& fake_x, double beta, Rng& rng);

struct GanTrainResult {
  GanModel model;
  std::vector<double> g_loss_history;  // per generator step
  std::vector<double> d_loss_history;  // per generator step, last critic value
  std::vector<double> val_history;     // validation metric when the hook is set
};

// Alternating WGAN-GP training. The classifier is pre-trained on the real
// seen features and frozen. When val_metric is set it runs every val_every
// generator steps and the best-scoring generator snapshot is returned.
GanTrainResult train_gan(const Tensor& features, const std::vector<std::string>& labels,
                         const io::EmbeddingTable& embeddings, const GanConfig& config,
                         const std::function<double(const GanModel&)>& val_metric = nullptr);

void save_gan(const std::string& path, const GanModel& model);
// classifier classes cannot be recovered from the weight file; pass them in
GanModel load_gan(const std::string& path, long embed_dim,
                  const std::vector<std::string>& classifier_classes);

}  // namespace ontozsl
