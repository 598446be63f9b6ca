#include "ontozsl/onto_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "ontozsl/adam.hpp"
#include "ontozsl/rng.hpp"

namespace ontozsl {

namespace {

constexpr double kNormEps = 1e-12;

double l2_distance(const Tensor& a) { return std::sqrt(dot(a, a) + kNormEps); }

Tensor combine(const Tensor& x, const Tensor& y, const Tensor& z, double sy, double sz) {
  require(x.same_shape(y) && x.same_shape(z), "score: dimension mismatch");
  Tensor out(x.rows(), x.cols());
  for (long i = 0; i < x.size(); ++i) out[i] = x[i] + sy * y[i] + sz * z[i];
  return out;
}

Tensor affine(const Linear& l, const Tensor& x) {
  Tensor out(1, l.out_dim());
  for (long j = 0; j < l.out_dim(); ++j) {
    double s = l.b[j];
    for (long i = 0; i < l.in_dim(); ++i) s += x[i] * l.W.at(i, j);
    out[j] = s;
  }
  return out;
}

// per-row -||a - b|| over batched score inputs, shared by the five terms
NodeId neg_row_distance(Graph& g, NodeId lhs, NodeId rhs) {
  NodeId diff = g.sub(lhs, rhs);
  return g.scale(g.sqrt_(g.add_scalar(g.row_sum(g.square(diff)), kNormEps)), -1.0);
}

uint64_t triple_key(long h, long p, long t, long n_concepts) {
  return (static_cast<uint64_t>(h) * 1000003u + static_cast<uint64_t>(p)) *
             static_cast<uint64_t>(n_concepts) +
         static_cast<uint64_t>(t);
}

}  // namespace

bool EncoderConfig::text_aware() const {
  if (mode == "text_aware") return true;
  if (mode == "default") return false;
  throw Error("unknown encoder mode: " + mode);
}

long EncoderModel::concept_index(const std::string& id) const {
  auto it = std::lower_bound(concepts.begin(), concepts.end(), id);
  require(it != concepts.end() && *it == id, "unknown concept: " + id);
  return it - concepts.begin();
}

long EncoderModel::property_index(const std::string& id) const {
  auto it = std::lower_bound(properties.begin(), properties.end(), id);
  require(it != properties.end() && *it == id, "unknown property: " + id);
  return it - properties.begin();
}

double score_structural(const Tensor& ci_s, const Tensor& p_s, const Tensor& cj_s) {
  return -l2_distance(combine(ci_s, p_s, cj_s, 1.0, -1.0));
}

double score_full(const Tensor& ci_s, const Tensor& ci_t, const Tensor& p_s, const Tensor& cj_s,
                  const Tensor& cj_t) {
  double fs = -l2_distance(combine(ci_s, p_s, cj_s, 1.0, -1.0));
  double ft = -l2_distance(combine(ci_t, p_s, cj_t, 1.0, -1.0));
  double fst = -l2_distance(combine(ci_s, p_s, cj_t, 1.0, -1.0));
  double fts = -l2_distance(combine(ci_t, p_s, cj_s, 1.0, -1.0));
  Tensor lhs = combine(ci_s, ci_t, p_s, 1.0, 1.0);   // (ci_s + ci_t) + p_s
  Tensor rhs = combine(cj_s, cj_t, p_s, 1.0, 0.0);   // cj_s + cj_t
  double fadd = -l2_distance(combine(lhs, rhs, rhs, -1.0, 0.0));
  return fs + ft + fst + fts + fadd;
}

NodeId encoder_loss_graph(Graph& g, EncoderModel& model, ParamSet& ps, const Tensor& text_rows,
                          const EncoderBatch& batch, double margin) {
  require(!batch.pos_h.empty(), "encoder batch is empty");
  NodeId concept_emb = ps.declare(g, model.concept_emb);
  NodeId property_emb = ps.declare(g, model.property_emb);
  NodeId prop = g.gather_rows(property_emb, batch.pos_p);

  NodeId f_pos, f_neg;
  if (!model.text_aware) {
    auto transe = [&](const std::vector<long>& hs, const std::vector<long>& ts) {
      NodeId h = g.gather_rows(concept_emb, hs);
      NodeId t = g.gather_rows(concept_emb, ts);
      return neg_row_distance(g, g.add(h, prop), t);
    };
    f_pos = transe(batch.pos_h, batch.pos_t);
    f_neg = transe(batch.neg_h, batch.neg_t);
  } else {
    LinearNodes lw_s = declare_linear(g, model.proj_struct, ps);
    LinearNodes lw_p = declare_linear(g, model.proj_prop, ps);
    LinearNodes lw_t = declare_linear(g, model.proj_text, ps);
    NodeId text = g.constant(text_rows);
    NodeId ps_p = apply_linear(g, lw_p, prop);
    auto full_score = [&](const std::vector<long>& hs, const std::vector<long>& ts) {
      NodeId hs_p = apply_linear(g, lw_s, g.gather_rows(concept_emb, hs));
      NodeId ts_p = apply_linear(g, lw_s, g.gather_rows(concept_emb, ts));
      NodeId ht_p = apply_linear(g, lw_t, g.gather_rows(text, hs));
      NodeId tt_p = apply_linear(g, lw_t, g.gather_rows(text, ts));
      NodeId fs = neg_row_distance(g, g.add(hs_p, ps_p), ts_p);
      NodeId ft = neg_row_distance(g, g.add(ht_p, ps_p), tt_p);
      NodeId fst = neg_row_distance(g, g.add(hs_p, ps_p), tt_p);
      NodeId fts = neg_row_distance(g, g.add(ht_p, ps_p), ts_p);
      NodeId fadd = neg_row_distance(g, g.add(g.add(hs_p, ht_p), ps_p), g.add(ts_p, tt_p));
      return g.add(g.add(g.add(fs, ft), g.add(fst, fts)), fadd);
    };
    f_pos = full_score(batch.pos_h, batch.pos_t);
    f_neg = full_score(batch.neg_h, batch.neg_t);
  }

  // [margin + f(corrupted) - f(positive)]_+
  return g.mean(g.relu(g.add_scalar(g.sub(f_neg, f_pos), margin)));
}

double EncoderResult::score(const std::string& head, const std::string& property,
                            const std::string& tail) const {
  const Tensor& p = proj_prop_rows_.at(property);
  if (!model.text_aware)
    return score_structural(proj_struct_rows_.at(head), p, proj_struct_rows_.at(tail));
  return score_full(proj_struct_rows_.at(head), proj_text_rows_.at(head), p,
                    proj_struct_rows_.at(tail), proj_text_rows_.at(tail));
}

EncoderResult train_encoder(const Schema& schema, const TextMatrix& text,
                            const EncoderConfig& config) {
  require(!schema.triples.empty(), "schema has no structural triples to train on");
  const bool text_aware = config.text_aware();

  EncoderModel model;
  model.text_aware = text_aware;
  model.concepts.assign(schema.concepts.begin(), schema.concepts.end());
  for (const Triple& t : schema.triples) {
    if (std::find(model.properties.begin(), model.properties.end(), t.property) ==
        model.properties.end())
      model.properties.push_back(t.property);
  }
  std::sort(model.properties.begin(), model.properties.end());

  const long n_concepts = static_cast<long>(model.concepts.size());
  const long n_props = static_cast<long>(model.properties.size());
  const long dim = config.dim;
  const long text_dim = text_aware ? std::max<long>(1, text.dim) : 1;

  Rng rng(config.seed);
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  model.concept_emb = rng.uniform_tensor(n_concepts, dim, -bound, bound);
  model.property_emb = rng.uniform_tensor(n_props, dim, -bound, bound);
  model.proj_struct = make_linear(rng, dim, dim);
  model.proj_prop = make_linear(rng, dim, dim);
  model.proj_text = make_linear(rng, text_dim, dim);

  // text rows aligned with the sorted concept order
  Tensor text_rows(n_concepts, text_dim, 0.0);
  if (text_aware && text.dim > 0) {
    for (long i = 0; i < n_concepts; ++i) {
      auto it = text.rows.find(model.concepts[i]);
      if (it == text.rows.end()) continue;
      for (long j = 0; j < text_dim; ++j) text_rows.at(i, j) = it->second[j];
    }
  }

  // index triples + membership set for the Eq. 7 rejection rule
  std::vector<std::array<long, 3>> triples;
  std::unordered_set<uint64_t> known;
  for (const Triple& t : schema.triples) {
    long h = model.concept_index(t.head);
    long p = model.property_index(t.property);
    long tl = model.concept_index(t.tail);
    triples.push_back({h, p, tl});
    known.insert(triple_key(h, p, tl, n_concepts));
  }

  auto corrupt = [&](const std::array<long, 3>& t, long& neg_h, long& neg_t) {
    for (int tries = 0; tries < 100; ++tries) {
      bool head_side = rng.coin();
      long repl = rng.uniform_int(n_concepts);
      long h = head_side ? repl : t[0];
      long tl = head_side ? t[2] : repl;
      if (!known.count(triple_key(h, t[1], tl, n_concepts))) {
        neg_h = h;
        neg_t = tl;
        return;
      }
    }
    neg_h = rng.uniform_int(n_concepts);  // dense degenerate schema; accept anything
    neg_t = t[2];
  };

  Adam opt(config.lr);
  AdamState state;
  EncoderResult result;
  std::vector<long> order(triples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<long>(i);

  for (long epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    long batches = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch)) {
      EncoderBatch batch;
      size_t end = std::min(order.size(), start + static_cast<size_t>(config.batch));
      for (size_t k = start; k < end; ++k) {
        const auto& t = triples[static_cast<size_t>(order[k])];
        long nh, nt;
        corrupt(t, nh, nt);
        batch.pos_h.push_back(t[0]);
        batch.pos_p.push_back(t[1]);
        batch.pos_t.push_back(t[2]);
        batch.neg_h.push_back(nh);
        batch.neg_t.push_back(nt);
      }
      Graph g;
      ParamSet ps;
      NodeId loss = encoder_loss_graph(g, model, ps, text_rows, batch, config.margin);
      auto grads = g.grad(loss, ps.nodes);
      opt.step(ps.tensors, grads, state);
      epoch_loss += g.value(loss)[0];
      ++batches;
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(batches));

    // TransE convention: structural concept embeddings back to unit norm
    for (long i = 0; i < n_concepts; ++i) {
      double n2 = 0;
      for (long j = 0; j < dim; ++j) n2 += model.concept_emb.at(i, j) * model.concept_emb.at(i, j);
      double n = std::sqrt(n2);
      if (n > kNormEps)
        for (long j = 0; j < dim; ++j) model.concept_emb.at(i, j) /= n;
    }
  }

  // emit per-concept projections and the concatenated table
  for (long i = 0; i < n_concepts; ++i) {
    Tensor raw(1, dim);
    for (long j = 0; j < dim; ++j) raw[j] = model.concept_emb.at(i, j);
    if (text_aware) {
      Tensor cs = affine(model.proj_struct, raw);
      Tensor dtext(1, text_dim);
      for (long j = 0; j < text_dim; ++j) dtext[j] = text_rows.at(i, j);
      Tensor ct = affine(model.proj_text, dtext);
      Tensor o(1, 2 * dim);
      for (long j = 0; j < dim; ++j) {
        o[j] = cs[j];
        o[dim + j] = ct[j];
      }
      result.proj_struct_rows_[model.concepts[i]] = std::move(cs);
      result.proj_text_rows_[model.concepts[i]] = std::move(ct);
      result.table[model.concepts[i]] = std::move(o);
    } else {
      result.proj_struct_rows_[model.concepts[i]] = raw;
      result.table[model.concepts[i]] = raw;
    }
  }
  for (long i = 0; i < n_props; ++i) {
    Tensor raw(1, dim);
    for (long j = 0; j < dim; ++j) raw[j] = model.property_emb.at(i, j);
    result.proj_prop_rows_[model.properties[i]] =
        text_aware ? affine(model.proj_prop, raw) : raw;
  }
  result.model = std::move(model);
  return result;
}

}  // namespace ontozsl
