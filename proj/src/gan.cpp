#include "ontozsl/gan.hpp"

#include <algorithm>
#include <set>

#include "ontozsl/adam.hpp"

namespace ontozsl {

namespace {

Tensor affine_batch(const Linear& l, const Tensor& x) {
  require(x.cols() == l.in_dim(), "affine: dimension mismatch");
  Tensor out(x.rows(), l.out_dim());
  for (long r = 0; r < x.rows(); ++r)
    for (long c = 0; c < l.out_dim(); ++c) {
      double s = l.b[c];
      for (long k = 0; k < x.cols(); ++k) s += x.at(r, k) * l.W.at(k, c);
      out.at(r, c) = s;
    }
  return out;
}

Tensor leaky(const Tensor& x, double slope) {
  Tensor out(x.rows(), x.cols());
  for (long i = 0; i < x.size(); ++i) out[i] = x[i] > 0 ? x[i] : slope * x[i];
  return out;
}

Tensor hconcat(const Tensor& a, const Tensor& b) {
  require(a.rows() == b.rows(), "hconcat: row mismatch");
  Tensor out(a.rows(), a.cols() + b.cols());
  for (long r = 0; r < a.rows(); ++r) {
    for (long c = 0; c < a.cols(); ++c) out.at(r, c) = a.at(r, c);
    for (long c = 0; c < b.cols(); ++c) out.at(r, a.cols() + c) = b.at(r, c);
  }
  return out;
}

// group batch rows by class, first-appearance order
std::vector<std::pair<std::string, std::vector<long>>> group_by_class(
    const std::vector<std::string>& classes) {
  std::vector<std::pair<std::string, std::vector<long>>> groups;
  for (size_t i = 0; i < classes.size(); ++i) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return g.first == classes[i]; });
    if (it == groups.end()) {
      groups.push_back({classes[i], {static_cast<long>(i)}});
    } else {
      it->second.push_back(static_cast<long>(i));
    }
  }
  return groups;
}

}  // namespace

std::vector<Tensor> GanModel::weight_tensors() const {
  return {g1.W, g1.b, g2.W, g2.b, d1.W, d1.b, d2.W, d2.b, classifier.layer.W,
          classifier.layer.b};
}

void GanModel::load_weight_tensors(const std::vector<Tensor>& ts) {
  require(ts.size() == 10, "gan checkpoint: expected 10 weight tensors");
  g1.W = ts[0];
  g1.b = ts[1];
  g2.W = ts[2];
  g2.b = ts[3];
  d1.W = ts[4];
  d1.b = ts[5];
  d2.W = ts[6];
  d2.b = ts[7];
  classifier.layer.W = ts[8];
  classifier.layer.b = ts[9];
}

ClassStats real_class_means(const Tensor& features, const std::vector<std::string>& labels) {
  require(features.rows() == static_cast<long>(labels.size()),
          "class means: label count mismatch");
  ClassStats stats;
  std::map<std::string, long> counts;
  for (long r = 0; r < features.rows(); ++r) {
    const std::string& c = labels[static_cast<size_t>(r)];
    auto [it, fresh] = stats.mean.try_emplace(c, Tensor(1, features.cols(), 0.0));
    (void)fresh;
    for (long k = 0; k < features.cols(); ++k) it->second[k] += features.at(r, k);
    ++counts[c];
  }
  for (auto& [c, m] : stats.mean)
    for (long k = 0; k < m.size(); ++k) m[k] /= static_cast<double>(counts[c]);
  return stats;
}

Tensor generator_forward(const GanModel& model, const Tensor& noise, const Tensor& embeds) {
  return affine_batch(model.g2, leaky(affine_batch(model.g1, hconcat(noise, embeds)),
                                      model.leaky_slope));
}

Tensor critic_forward(const GanModel& model, const Tensor& x, const Tensor& embeds) {
  return affine_batch(model.d2, leaky(affine_batch(model.d1, hconcat(x, embeds)),
                                      model.leaky_slope));
}

Tensor generate(const GanModel& model, const Tensor& concept_embedding, long n, uint64_t seed) {
  require(n >= 1, "generate: n must be at least 1");
  require(concept_embedding.size() == model.embed_dim,
          "generate: concept embedding dimension mismatch");
  Rng rng(seed);
  Tensor noise = rng.normal_tensor(n, model.noise_dim);
  Tensor embeds(n, model.embed_dim);
  for (long r = 0; r < n; ++r)
    for (long c = 0; c < model.embed_dim; ++c) embeds.at(r, c) = concept_embedding[c];
  return generator_forward(model, noise, embeds);
}

NodeId generator_loss_graph(Graph& g, GanModel& model, ParamSet& ps, const GanBatch& batch,
                            const ClassStats& stats, const Tensor& noise, double lambda1,
                            double lambda2) {
  const long b = batch.embeds.rows();
  require(noise.rows() == b && noise.cols() == model.noise_dim, "loss_G: bad noise shape");
  require(static_cast<long>(batch.classes.size()) == b, "loss_G: class count mismatch");

  LinearNodes g1 = declare_linear(g, model.g1, ps);
  LinearNodes g2 = declare_linear(g, model.g2, ps);
  NodeId gin = g.concat_cols(g.constant(noise), g.constant(batch.embeds));
  NodeId fake = apply_linear(g, g2, g.leaky_relu(apply_linear(g, g1, gin), model.leaky_slope));

  // Wasserstein term with frozen critic
  LinearNodes d1 = freeze_linear(g, model.d1);
  LinearNodes d2 = freeze_linear(g, model.d2);
  NodeId din = g.concat_cols(fake, g.constant(batch.embeds));
  NodeId crit = apply_linear(g, d2, g.leaky_relu(apply_linear(g, d1, din), model.leaky_slope));
  NodeId loss = g.scale(g.mean(crit), -1.0);

  // supervised classification loss under the frozen seen-class classifier
  if (lambda1 != 0.0) {
    std::vector<long> gold;
    gold.reserve(batch.classes.size());
    for (const auto& c : batch.classes) gold.push_back(model.classifier.class_index(c));
    LinearNodes cl = freeze_linear(g, model.classifier.layer);
    NodeId nll = softmax_nll(g, apply_linear(g, cl, fake), gold);
    loss = g.add(loss, g.scale(nll, lambda1));
  }

  // pivot regularization: per-class generated means against the real means
  if (lambda2 != 0.0) {
    auto groups = group_by_class(batch.classes);
    NodeId pivot = -1;
    for (const auto& [cls, rows] : groups) {
      auto it = stats.mean.find(cls);
      require(it != stats.mean.end(), "loss_G: class absent from real class stats: " + cls);
      NodeId gen_mean = g.scale(g.col_sum(g.gather_rows(fake, rows)),
                                1.0 / static_cast<double>(rows.size()));
      NodeId diff = g.sub(gen_mean, g.constant(it->second));
      NodeId sq = g.sum(g.square(diff));
      pivot = pivot < 0 ? sq : g.add(pivot, sq);
    }
    pivot = g.scale(pivot, 1.0 / static_cast<double>(groups.size()));
    loss = g.add(loss, g.scale(pivot, lambda2));
  }
  return loss;
}

NodeId discriminator_loss_graph(Graph& g, GanModel& model, ParamSet& ps, const GanBatch& real,
                                const Tensor& fake_x, const Tensor& eps, double beta) {
  const long b = real.real_x.rows();
  require(fake_x.rows() == b && fake_x.cols() == real.real_x.cols(),
          "loss_D: real/fake batch mismatch");
  require(eps.rows() == b && eps.cols() == 1, "loss_D: eps must be one draw per sample");

  LinearNodes d1 = declare_linear(g, model.d1, ps);
  LinearNodes d2 = declare_linear(g, model.d2, ps);
  NodeId embeds = g.constant(real.embeds);
  auto critic = [&](NodeId x) {
    NodeId h = g.leaky_relu(apply_linear(g, d1, g.concat_cols(x, embeds)), model.leaky_slope);
    return apply_linear(g, d2, h);
  };

  NodeId d_real = critic(g.constant(real.real_x));
  NodeId d_fake = critic(g.constant(fake_x));
  NodeId wass = g.sub(g.mean(d_real), g.mean(d_fake));

  // x~ = eps*x + (1-eps)*x_hat, one eps per sample shared across coordinates
  Tensor interp(b, real.real_x.cols());
  for (long r = 0; r < b; ++r)
    for (long c = 0; c < real.real_x.cols(); ++c)
      interp.at(r, c) =
          eps.at(r, 0) * real.real_x.at(r, c) + (1.0 - eps.at(r, 0)) * fake_x.at(r, c);

  NodeId xt = g.input(interp);
  NodeId d_interp = critic(xt);
  // rows are independent, so the adjoint of the sum is the per-sample gradient
  NodeId grads = g.input_grad(g.sum(d_interp), xt);
  NodeId norms = g.sqrt_(g.add_scalar(g.row_sum(g.square(grads)), 1e-12));
  NodeId penalty = g.mean(g.square(g.add_scalar(norms, -1.0)));

  return g.sub(wass, g.scale(penalty, beta));
}

double loss_G(GanModel& model, const GanBatch& batch, const ClassStats& stats, double lambda1,
              double lambda2, Rng& rng) {
  Graph g;
  ParamSet ps;
  Tensor noise = rng.normal_tensor(batch.embeds.rows(), model.noise_dim);
  return g.value(generator_loss_graph(g, model, ps, batch, stats, noise, lambda1, lambda2))[0];
}

double loss_D(GanModel& model, const GanBatch& real, const Tensor& fake_x, double beta,
              Rng& rng) {
  Graph g;
  ParamSet ps;
  Tensor eps(real.real_x.rows(), 1);
  for (long r = 0; r < eps.rows(); ++r) eps.at(r, 0) = rng.uniform();
  return g.value(discriminator_loss_graph(g, model, ps, real, fake_x, eps, beta))[0];
}

GanTrainResult train_gan(const Tensor& features, const std::vector<std::string>& labels,
                         const io::EmbeddingTable& embeddings, const GanConfig& config,
                         const std::function<double(const GanModel&)>& val_metric) {
  require(features.rows() == static_cast<long>(labels.size()), "train_gan: label count mismatch");
  require(features.rows() > 0, "train_gan: no training features");

  std::set<std::string> class_set(labels.begin(), labels.end());
  for (const std::string& c : class_set)
    require(embeddings.count(c), "train_gan: missing embedding for class: " + c);

  const long embed_dim = io::embedding_dim(embeddings);

  GanTrainResult result;
  GanModel& model = result.model;
  Rng rng(config.seed);
  model.noise_dim = config.noise_dim;
  model.embed_dim = embed_dim;
  model.feature_dim = features.cols();
  model.g1 = make_linear(rng, config.noise_dim + embed_dim, config.hidden_g);
  model.g2 = make_linear(rng, config.hidden_g, features.cols());
  model.d1 = make_linear(rng, features.cols() + embed_dim, config.hidden_d);
  model.d2 = make_linear(rng, config.hidden_d, 1);

  // frozen seen-class classifier for the classification loss
  SoftmaxConfig cls_cfg = config.classifier;
  cls_cfg.seed = config.seed;
  model.classifier =
      train_softmax(features, labels, {class_set.begin(), class_set.end()}, cls_cfg);

  ClassStats stats = real_class_means(features, labels);

  Adam g_opt(config.lr), d_opt(config.lr);
  AdamState g_state, d_state;
  const long n = features.rows();
  const long bsz = std::min(config.batch, n);

  auto sample_batch = [&](GanBatch& batch) {
    Tensor x(bsz, features.cols());
    Tensor o(bsz, embed_dim);
    batch.classes.clear();
    for (long r = 0; r < bsz; ++r) {
      long row = rng.uniform_int(n);
      const std::string& c = labels[static_cast<size_t>(row)];
      const Tensor& e = embeddings.at(c);
      for (long k = 0; k < features.cols(); ++k) x.at(r, k) = features.at(row, k);
      for (long k = 0; k < embed_dim; ++k) o.at(r, k) = e[k];
      batch.classes.push_back(c);
    }
    batch.real_x = std::move(x);
    batch.embeds = std::move(o);
  };

  double best_val = -1e300;
  GanModel best_model = model;
  bool have_best = false;

  for (long iter = 0; iter < config.iters; ++iter) {
    double last_d = 0.0;
    for (long k = 0; k < config.n_critic; ++k) {
      GanBatch batch;
      sample_batch(batch);
      Tensor noise = rng.normal_tensor(bsz, config.noise_dim);
      Tensor fake = generator_forward(model, noise, batch.embeds);
      Tensor eps(bsz, 1);
      for (long r = 0; r < bsz; ++r) eps.at(r, 0) = rng.uniform();

      Graph g;
      ParamSet ps;
      NodeId d_obj = discriminator_loss_graph(g, model, ps, batch, fake, eps, config.beta);
      NodeId d_loss = g.scale(d_obj, -1.0);  // ascend the objective
      auto grads = g.grad(d_loss, ps.nodes);
      d_opt.step(ps.tensors, grads, d_state);
      last_d = g.value(d_obj)[0];
    }

    GanBatch batch;
    sample_batch(batch);
    Tensor noise = rng.normal_tensor(bsz, config.noise_dim);
    Graph g;
    ParamSet ps;
    NodeId g_loss = generator_loss_graph(g, model, ps, batch, stats, noise, config.lambda1,
                                         config.lambda2);
    auto grads = g.grad(g_loss, ps.nodes);
    g_opt.step(ps.tensors, grads, g_state);

    result.g_loss_history.push_back(g.value(g_loss)[0]);
    result.d_loss_history.push_back(last_d);

    if (val_metric && config.val_every > 0 && (iter + 1) % config.val_every == 0) {
      double v = val_metric(model);
      result.val_history.push_back(v);
      if (v > best_val) {
        best_val = v;
        best_model = model;
        have_best = true;
      }
    }
  }

  if (val_metric && have_best) result.model = best_model;
  return result;
}

void save_gan(const std::string& path, const GanModel& model) {
  io::write_checkpoint(path, model.weight_tensors());
}

GanModel load_gan(const std::string& path, long embed_dim,
                  const std::vector<std::string>& classifier_classes) {
  GanModel model;
  model.load_weight_tensors(io::read_checkpoint(path));
  model.embed_dim = embed_dim;
  model.noise_dim = model.g1.in_dim() - embed_dim;
  model.feature_dim = model.g2.out_dim();
  require(model.noise_dim > 0, "gan checkpoint inconsistent with embedding dimension");
  model.classifier.classes = classifier_classes;
  std::sort(model.classifier.classes.begin(), model.classifier.classes.end());
  return model;
}

}  // namespace ontozsl
