#include "ontozsl/kgc.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "ontozsl/adam.hpp"

namespace ontozsl {

namespace {

constexpr double kEps = 1e-12;

std::set<std::string> read_relation_list(const std::string& path) {
  std::set<std::string> out;
  for (const std::string& line : io::read_lines(path))
    if (!line.empty()) out.insert(line);
  return out;
}

Tensor affine_batch(const Linear& l, const Tensor& x) {
  Tensor out(x.rows(), l.out_dim());
  for (long r = 0; r < x.rows(); ++r)
    for (long c = 0; c < l.out_dim(); ++c) {
      double s = l.b[c];
      for (long k = 0; k < x.cols(); ++k) s += x.at(r, k) * l.W.at(k, c);
      out.at(r, c) = s;
    }
  return out;
}

// stable softplus: relu(x) + log(1 + exp(-|x|))
NodeId softplus(Graph& g, NodeId x) {
  NodeId r = g.relu(x);
  NodeId neg_abs = g.sub(x, g.scale(r, 2.0));
  return g.add(r, g.log_(g.add_scalar(g.exp_(neg_abs), 1.0)));
}

uint64_t pair_key(long a, long b) {
  return static_cast<uint64_t>(a) * 2000003u + static_cast<uint64_t>(b);
}

}  // namespace

long KGDataset::entity_index(const std::string& id) const {
  auto it = std::lower_bound(entities.begin(), entities.end(), id);
  require(it != entities.end() && *it == id, "unknown entity: " + id);
  return it - entities.begin();
}

void KGDataset::validate() const {
  for (const std::string& r : test_relations) {
    require(!train_relations.count(r), "relation in both train and test: " + r);
    require(!valid_relations.count(r), "relation in both valid and test: " + r);
  }
  for (const std::string& r : valid_relations)
    require(!train_relations.count(r), "relation in both train and valid: " + r);

  std::set<std::string> train_entities;
  for (const Triple& t : train_triples) {
    train_entities.insert(t.head);
    train_entities.insert(t.tail);
  }
  auto check_closed = [&](const std::vector<Triple>& ts, const char* what) {
    for (const Triple& t : ts) {
      require(train_entities.count(t.head),
              std::string(what) + " head entity not in training triples: " + t.head);
      require(train_entities.count(t.tail),
              std::string(what) + " tail entity not in training triples: " + t.tail);
    }
  };
  check_closed(valid_triples, "validation");
  check_closed(test_triples, "test");
}

KGDataset load_kg(const std::string& triples_path, const std::string& train_rel_path,
                  const std::string& valid_rel_path, const std::string& test_rel_path) {
  KGDataset kg;
  kg.train_relations = read_relation_list(train_rel_path);
  kg.valid_relations = read_relation_list(valid_rel_path);
  kg.test_relations = read_relation_list(test_rel_path);

  std::set<std::string> entity_set, relation_set;
  long lineno = 0;
  for (const std::string& line : io::read_lines(triples_path)) {
    ++lineno;
    if (line.empty()) continue;
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw Error(triples_path + ":" + std::to_string(lineno) +
                  ": expected `h TAB r TAB t`");
    Triple t{line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), line.substr(t2 + 1)};
    require(!t.head.empty() && !t.property.empty() && !t.tail.empty(),
            triples_path + ":" + std::to_string(lineno) + ": empty identifier");
    entity_set.insert(t.head);
    entity_set.insert(t.tail);
    relation_set.insert(t.property);
    if (kg.train_relations.count(t.property))
      kg.train_triples.push_back(t);
    else if (kg.valid_relations.count(t.property))
      kg.valid_triples.push_back(t);
    else if (kg.test_relations.count(t.property))
      kg.test_triples.push_back(t);
    else
      throw Error(triples_path + ":" + std::to_string(lineno) +
                  ": relation not in any split: " + t.property);
  }
  kg.entities.assign(entity_set.begin(), entity_set.end());
  kg.relations.assign(relation_set.begin(), relation_set.end());
  kg.validate();
  return kg;
}

double transe_score(const Tensor& h, const Tensor& r, const Tensor& t) {
  require(h.size() == r.size() && h.size() == t.size(), "transe_score: dimension mismatch");
  double s = 0;
  for (long i = 0; i < h.size(); ++i) {
    double d = h[i] + r[i] - t[i];
    s += d * d;
  }
  return -std::sqrt(s);
}

double distmult_score(const Tensor& h, const Tensor& r, const Tensor& t) {
  require(h.size() == r.size() && h.size() == t.size(), "distmult_score: dimension mismatch");
  double s = 0;
  for (long i = 0; i < h.size(); ++i) s += h[i] * r[i] * t[i];
  return s;
}

KgeResult pretrain_kge(const KGDataset& kg, const KgeConfig& config) {
  require(!kg.train_triples.empty(), "pretrain_kge: no training triples");
  const bool transe = config.method == "transe";
  if (!transe) require(config.method == "distmult", "unknown KG embedding method: " + config.method);

  std::vector<std::string> rels(kg.train_relations.begin(), kg.train_relations.end());
  const long n_ent = static_cast<long>(kg.entities.size());
  const long n_rel = static_cast<long>(rels.size());
  auto rel_index = [&](const std::string& id) {
    auto it = std::lower_bound(rels.begin(), rels.end(), id);
    require(it != rels.end() && *it == id, "unknown training relation: " + id);
    return static_cast<long>(it - rels.begin());
  };

  std::vector<std::array<long, 3>> triples;
  std::unordered_set<uint64_t> known;
  for (const Triple& t : kg.train_triples) {
    long h = kg.entity_index(t.head), r = rel_index(t.property), tl = kg.entity_index(t.tail);
    triples.push_back({h, r, tl});
    known.insert((static_cast<uint64_t>(h) * 1000003u + static_cast<uint64_t>(r)) *
                     static_cast<uint64_t>(n_ent) +
                 static_cast<uint64_t>(tl));
  }
  auto is_known = [&](long h, long r, long t) {
    return known.count((static_cast<uint64_t>(h) * 1000003u + static_cast<uint64_t>(r)) *
                           static_cast<uint64_t>(n_ent) +
                       static_cast<uint64_t>(t)) > 0;
  };

  Rng rng(config.seed);
  const double bound = 6.0 / std::sqrt(static_cast<double>(config.dim));
  Tensor ent_emb = rng.uniform_tensor(n_ent, config.dim, -bound, bound);
  Tensor rel_emb = rng.uniform_tensor(n_rel, config.dim, -bound, bound);

  Adam opt(config.lr);
  AdamState state;
  KgeResult result;
  result.method = config.method;

  std::vector<long> order(triples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<long>(i);

  for (long epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0;
    long batches = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch)) {
      size_t end = std::min(order.size(), start + static_cast<size_t>(config.batch));
      std::vector<long> hs, rs, ts, nhs, nts;
      for (size_t k = start; k < end; ++k) {
        const auto& t = triples[static_cast<size_t>(order[k])];
        long nh = t[0], nt = t[2];
        for (int tries = 0; tries < 100; ++tries) {
          bool head_side = rng.coin();
          long repl = rng.uniform_int(n_ent);
          long ch = head_side ? repl : t[0];
          long ct = head_side ? t[2] : repl;
          if (!is_known(ch, t[1], ct)) {
            nh = ch;
            nt = ct;
            break;
          }
        }
        hs.push_back(t[0]);
        rs.push_back(t[1]);
        ts.push_back(t[2]);
        nhs.push_back(nh);
        nts.push_back(nt);
      }

      Graph g;
      ParamSet ps;
      NodeId ent = ps.declare(g, ent_emb);
      NodeId rel = ps.declare(g, rel_emb);
      NodeId r_rows = g.gather_rows(rel, rs);
      NodeId loss;
      if (transe) {
        auto distance = [&](const std::vector<long>& a, const std::vector<long>& b) {
          NodeId diff = g.sub(g.add(g.gather_rows(ent, a), r_rows), g.gather_rows(ent, b));
          return g.sqrt_(g.add_scalar(g.row_sum(g.square(diff)), kEps));
        };
        NodeId d_pos = distance(hs, ts);
        NodeId d_neg = distance(nhs, nts);
        loss = g.mean(g.relu(g.add_scalar(g.sub(d_pos, d_neg), config.margin)));
      } else {
        auto score = [&](const std::vector<long>& a, const std::vector<long>& b) {
          return g.row_sum(
              g.mul(g.mul(g.gather_rows(ent, a), r_rows), g.gather_rows(ent, b)));
        };
        NodeId pos = score(hs, ts);
        NodeId neg = score(nhs, nts);
        loss = g.add(g.mean(softplus(g, g.scale(pos, -1.0))), g.mean(softplus(g, neg)));
      }
      auto grads = g.grad(loss, ps.nodes);
      opt.step(ps.tensors, grads, state);
      epoch_loss += g.value(loss)[0];
      ++batches;
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(batches));
  }

  for (long i = 0; i < n_ent; ++i) {
    Tensor row(1, config.dim);
    for (long j = 0; j < config.dim; ++j) row[j] = ent_emb.at(i, j);
    result.entity_vecs[kg.entities[static_cast<size_t>(i)]] = std::move(row);
  }
  for (long i = 0; i < n_rel; ++i) {
    Tensor row(1, config.dim);
    for (long j = 0; j < config.dim; ++j) row[j] = rel_emb.at(i, j);
    result.relation_vecs[rels[static_cast<size_t>(i)]] = std::move(row);
  }
  return result;
}

std::vector<std::vector<std::pair<long, long>>> build_neighbor_index(const KGDataset& kg,
                                                                     long cap, uint64_t seed) {
  std::vector<std::string> rels(kg.train_relations.begin(), kg.train_relations.end());
  auto rel_index = [&](const std::string& id) {
    return static_cast<long>(std::lower_bound(rels.begin(), rels.end(), id) - rels.begin());
  };
  std::vector<std::vector<std::pair<long, long>>> nbr(kg.entities.size());
  for (const Triple& t : kg.train_triples)
    nbr[static_cast<size_t>(kg.entity_index(t.head))].push_back(
        {rel_index(t.property), kg.entity_index(t.tail)});

  Rng rng(seed);
  for (auto& list : nbr) {
    std::sort(list.begin(), list.end());
    if (static_cast<long>(list.size()) > cap) {
      std::vector<long> pick = rng.sample_without_replacement(static_cast<long>(list.size()), cap);
      std::sort(pick.begin(), pick.end());
      std::vector<std::pair<long, long>> capped;
      capped.reserve(static_cast<size_t>(cap));
      for (long i : pick) capped.push_back(list[static_cast<size_t>(i)]);
      list = std::move(capped);
    }
  }
  return nbr;
}

Tensor PairEmbedder::pair_embedding(long h, long t) const {
  auto one_entity = [&](long e) {
    Tensor row(1, entity_vecs.cols());
    for (long c = 0; c < entity_vecs.cols(); ++c) row[c] = entity_vecs.at(e, c);
    Tensor f1_out = affine_batch(model.f1, row);
    for (long c = 0; c < f1_out.size(); ++c) f1_out[c] = std::tanh(f1_out[c]);
    return f1_out;
  };
  auto structural = [&](long e) {
    const auto& list = neighbors[static_cast<size_t>(e)];
    Tensor u(1, model.f2.out_dim(), 0.0);
    if (list.empty()) return u;  // no neighbors: zero vector
    Tensor in(static_cast<long>(list.size()), 2 * entity_vecs.cols());
    for (size_t i = 0; i < list.size(); ++i) {
      for (long c = 0; c < entity_vecs.cols(); ++c) {
        in.at(static_cast<long>(i), c) = relation_vecs.at(list[i].first, c);
        in.at(static_cast<long>(i), entity_vecs.cols() + c) = entity_vecs.at(list[i].second, c);
      }
    }
    Tensor f2_out = affine_batch(model.f2, in);
    for (long r = 0; r < f2_out.rows(); ++r)
      for (long c = 0; c < f2_out.cols(); ++c) u[c] += f2_out.at(r, c);
    for (long c = 0; c < u.size(); ++c)
      u[c] = std::tanh(u[c] / static_cast<double>(list.size()));
    return u;
  };

  Tensor uh = one_entity(h), ut = one_entity(t);
  Tensor sh = structural(h), st = structural(t);
  Tensor out(1, model.pair_dim());
  long at = 0;
  for (const Tensor* part : {&uh, &ut, &sh, &st})
    for (long c = 0; c < part->size(); ++c) out[at++] = (*part)[c];
  return out;
}

PairEmbedder::Cache PairEmbedder::build_cache() const {
  Cache cache;
  cache.f1_rows = affine_batch(model.f1, entity_vecs);
  for (long i = 0; i < cache.f1_rows.size(); ++i)
    cache.f1_rows[i] = std::tanh(cache.f1_rows[i]);
  cache.u_rows = Tensor(entity_vecs.rows(), model.f2.out_dim(), 0.0);
  for (long e = 0; e < entity_vecs.rows(); ++e) {
    const auto& list = neighbors[static_cast<size_t>(e)];
    if (list.empty()) continue;
    Tensor in(static_cast<long>(list.size()), 2 * entity_vecs.cols());
    for (size_t i = 0; i < list.size(); ++i) {
      for (long c = 0; c < entity_vecs.cols(); ++c) {
        in.at(static_cast<long>(i), c) = relation_vecs.at(list[i].first, c);
        in.at(static_cast<long>(i), entity_vecs.cols() + c) = entity_vecs.at(list[i].second, c);
      }
    }
    Tensor f2_out = affine_batch(model.f2, in);
    for (long c = 0; c < model.f2.out_dim(); ++c) {
      double s = 0;
      for (long r = 0; r < f2_out.rows(); ++r) s += f2_out.at(r, c);
      cache.u_rows.at(e, c) = std::tanh(s / static_cast<double>(list.size()));
    }
  }
  return cache;
}

Tensor PairEmbedder::pair_embedding_cached(const Cache& c, long h, long t) const {
  Tensor out(1, model.pair_dim());
  long at = 0;
  const long f1d = model.f1.out_dim(), f2d = model.f2.out_dim();
  for (long k = 0; k < f1d; ++k) out[at++] = c.f1_rows.at(h, k);
  for (long k = 0; k < f1d; ++k) out[at++] = c.f1_rows.at(t, k);
  for (long k = 0; k < f2d; ++k) out[at++] = c.u_rows.at(h, k);
  for (long k = 0; k < f2d; ++k) out[at++] = c.u_rows.at(t, k);
  return out;
}

ExtractorResult train_extractor(const KGDataset& kg, const KgeResult& kge,
                                const ExtractorConfig& config) {
  require(kge.method == "transe" || kge.method == "distmult",
          "train_extractor: unrecognized pretraining method");
  const long n_ent = static_cast<long>(kg.entities.size());
  const long dim = io::embedding_dim(kge.entity_vecs);

  ExtractorResult result;
  PairEmbedder& pe = result.embedder;
  pe.entity_vecs = Tensor(n_ent, dim);
  for (long i = 0; i < n_ent; ++i) {
    auto it = kge.entity_vecs.find(kg.entities[static_cast<size_t>(i)]);
    require(it != kge.entity_vecs.end(),
            "missing pretrained vector for entity: " + kg.entities[static_cast<size_t>(i)]);
    for (long c = 0; c < dim; ++c) pe.entity_vecs.at(i, c) = it->second[c];
  }
  pe.relation_ids.assign(kg.train_relations.begin(), kg.train_relations.end());
  pe.relation_vecs = Tensor(static_cast<long>(pe.relation_ids.size()), dim);
  for (size_t i = 0; i < pe.relation_ids.size(); ++i) {
    auto it = kge.relation_vecs.find(pe.relation_ids[i]);
    require(it != kge.relation_vecs.end(),
            "missing pretrained vector for relation: " + pe.relation_ids[i]);
    for (long c = 0; c < dim; ++c) pe.relation_vecs.at(static_cast<long>(i), c) = it->second[c];
  }

  Rng rng(config.seed);
  pe.neighbors = build_neighbor_index(kg, config.neighbor_cap, config.seed);
  pe.model.f1 = make_linear(rng, dim, config.f1_dim);
  pe.model.f2 = make_linear(rng, 2 * dim, config.f2_dim);

  // bags: per training relation, all its (h, t) pairs; a fixed seeded
  // reference subset anchors the hinge
  struct Bag {
    std::string relation;
    std::vector<std::pair<long, long>> refs, positives;
    std::unordered_set<uint64_t> known_pairs;
  };
  std::vector<Bag> bags;
  std::map<std::string, std::vector<std::pair<long, long>>> by_rel;
  for (const Triple& t : kg.train_triples)
    by_rel[t.property].push_back({kg.entity_index(t.head), kg.entity_index(t.tail)});
  for (auto& [rel, pairs] : by_rel) {
    if (static_cast<long>(pairs.size()) <= config.ref_count) {
      result.skipped_relations.push_back(rel);
      continue;
    }
    Bag bag;
    bag.relation = rel;
    std::vector<long> pick =
        rng.sample_without_replacement(static_cast<long>(pairs.size()), config.ref_count);
    std::sort(pick.begin(), pick.end());
    size_t pi = 0;
    for (size_t i = 0; i < pairs.size(); ++i) {
      if (pi < pick.size() && static_cast<long>(i) == pick[pi]) {
        bag.refs.push_back(pairs[i]);
        ++pi;
      } else {
        bag.positives.push_back(pairs[i]);
      }
      bag.known_pairs.insert(pair_key(pairs[i].first, pairs[i].second));
    }
    bags.push_back(std::move(bag));
  }
  require(!bags.empty(), "train_extractor: every relation bag is smaller than the reference count");

  Adam opt(config.lr);
  AdamState state;

  for (long epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0;
    for (const Bag& bag : bags) {
      // sample positives and corrupt their tails
      std::vector<std::pair<long, long>> pos, neg;
      long take = std::min<long>(config.batch, static_cast<long>(bag.positives.size()));
      std::vector<long> pick =
          rng.sample_without_replacement(static_cast<long>(bag.positives.size()), take);
      for (long i : pick) {
        auto p = bag.positives[static_cast<size_t>(i)];
        long t_neg = p.second;
        for (int tries = 0; tries < 100; ++tries) {
          long cand = rng.uniform_int(n_ent);
          if (!bag.known_pairs.count(pair_key(p.first, cand))) {
            t_neg = cand;
            break;
          }
        }
        pos.push_back(p);
        neg.push_back({p.first, t_neg});
      }

      // assemble all pairs: refs, then positives, then negatives
      std::vector<std::pair<long, long>> all = bag.refs;
      all.insert(all.end(), pos.begin(), pos.end());
      all.insert(all.end(), neg.begin(), neg.end());

      std::vector<long> ents;
      for (auto [h, t] : all) {
        ents.push_back(h);
        ents.push_back(t);
      }
      std::sort(ents.begin(), ents.end());
      ents.erase(std::unique(ents.begin(), ents.end()), ents.end());
      auto pos_of = [&](long e) {
        return static_cast<long>(std::lower_bound(ents.begin(), ents.end(), e) - ents.begin());
      };

      Graph g;
      ParamSet ps;
      LinearNodes f1 = declare_linear(g, pe.model.f1, ps);
      LinearNodes f2 = declare_linear(g, pe.model.f2, ps);

      // f1 on every involved entity
      Tensor ent_rows(static_cast<long>(ents.size()), dim);
      for (size_t i = 0; i < ents.size(); ++i)
        for (long c = 0; c < dim; ++c)
          ent_rows.at(static_cast<long>(i), c) = pe.entity_vecs.at(ents[i], c);
      NodeId f1_out = apply_linear(g, f1, g.constant(ent_rows));

      // neighbor means per involved entity, stacked into one matrix
      NodeId u_pre = -1;
      for (long e : ents) {
        const auto& list = pe.neighbors[static_cast<size_t>(e)];
        NodeId row;
        if (list.empty()) {
          row = g.constant(Tensor(1, config.f2_dim, 0.0));
        } else {
          Tensor in(static_cast<long>(list.size()), 2 * dim);
          for (size_t i = 0; i < list.size(); ++i)
            for (long c = 0; c < dim; ++c) {
              in.at(static_cast<long>(i), c) = pe.relation_vecs.at(list[i].first, c);
              in.at(static_cast<long>(i), dim + c) = pe.entity_vecs.at(list[i].second, c);
            }
          row = g.scale(g.col_sum(apply_linear(g, f2, g.constant(in))),
                        1.0 / static_cast<double>(list.size()));
        }
        u_pre = u_pre < 0 ? row : g.concat_rows(u_pre, row);
      }
      NodeId u_rows = g.tanh_(u_pre);

      std::vector<long> h_pos_idx, t_pos_idx;
      for (auto [h, t] : all) {
        h_pos_idx.push_back(pos_of(h));
        t_pos_idx.push_back(pos_of(t));
      }
      NodeId u_ep = g.tanh_(g.concat_cols(g.gather_rows(f1_out, h_pos_idx),
                                          g.gather_rows(f1_out, t_pos_idx)));
      NodeId u_h = g.gather_rows(u_rows, h_pos_idx);
      NodeId u_t = g.gather_rows(u_rows, t_pos_idx);
      NodeId pair_rows = g.concat_cols(u_ep, g.concat_cols(u_h, u_t));

      const long m = static_cast<long>(bag.refs.size());
      const long b = static_cast<long>(pos.size());
      std::vector<long> ref_rows(static_cast<size_t>(m)), pos_rows(static_cast<size_t>(b)),
          neg_rows(static_cast<size_t>(b));
      for (long i = 0; i < m; ++i) ref_rows[static_cast<size_t>(i)] = i;
      for (long i = 0; i < b; ++i) pos_rows[static_cast<size_t>(i)] = m + i;
      for (long i = 0; i < b; ++i) neg_rows[static_cast<size_t>(i)] = m + b + i;

      NodeId x_ref = g.scale(g.col_sum(g.gather_rows(pair_rows, ref_rows)),
                             1.0 / static_cast<double>(m));
      NodeId ref_norm = g.sqrt_(g.add_scalar(g.row_sum(g.square(x_ref)), kEps));

      auto cosine_to_ref = [&](const std::vector<long>& rows) {
        NodeId x = g.gather_rows(pair_rows, rows);
        NodeId dots = g.row_sum(g.mul(g.broadcast_rows(x_ref, b), x));
        NodeId norms = g.sqrt_(g.add_scalar(g.row_sum(g.square(x)), kEps));
        NodeId denom = g.mul(g.broadcast_full(ref_norm, b, 1), norms);
        return g.div(dots, g.add_scalar(denom, kEps));
      };
      NodeId s_pos = cosine_to_ref(pos_rows);
      NodeId s_neg = cosine_to_ref(neg_rows);

      // [gamma_f - score+ + score-]_+ (standard orientation)
      NodeId loss = g.mean(g.relu(g.add_scalar(g.sub(s_neg, s_pos), config.margin)));
      auto grads = g.grad(loss, ps.nodes);
      opt.step(ps.tensors, grads, state);
      epoch_loss += g.value(loss)[0];
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(bags.size()));
  }
  return result;
}

long rank_tail(const PairEmbedder& pe, const PairEmbedder::Cache& cache, const Tensor& generated,
               long head, long gold, const std::vector<long>& candidates,
               const std::set<long>& filter) {
  require(generated.cols() == pe.model.pair_dim(),
          "rank_tail: generated embedding dimension mismatch");
  bool gold_present = false;
  for (long c : candidates)
    if (c == gold) gold_present = true;
  require(gold_present, "rank_tail: gold tail missing from candidate set");

  std::vector<double> gen_norms(static_cast<size_t>(generated.rows()));
  for (long i = 0; i < generated.rows(); ++i) {
    double n2 = 0;
    for (long c = 0; c < generated.cols(); ++c) n2 += generated.at(i, c) * generated.at(i, c);
    gen_norms[static_cast<size_t>(i)] = std::sqrt(n2);
  }

  auto score = [&](long tail) {
    Tensor x = pe.pair_embedding_cached(cache, head, tail);
    double xn = x.l2_norm();
    double v = 0;
    for (long i = 0; i < generated.rows(); ++i) {
      double d = 0;
      for (long c = 0; c < generated.cols(); ++c) d += generated.at(i, c) * x[c];
      v += d / (gen_norms[static_cast<size_t>(i)] * xn + kEps);
    }
    return v / static_cast<double>(generated.rows());
  };

  double gold_score = score(gold);
  long rank = 1;
  for (long c : candidates) {
    if (c == gold) continue;
    if (filter.count(c)) continue;  // known-true tails are filtered out
    double v = score(c);
    if (v > gold_score || (v == gold_score && c < gold)) ++rank;
  }
  return rank;
}

std::map<std::string, double> kgc_metrics(const std::vector<long>& ranks) {
  require(!ranks.empty(), "kgc_metrics: empty rank list");
  double mrr = 0, h1 = 0, h5 = 0, h10 = 0;
  for (long r : ranks) {
    require(r >= 1, "kgc_metrics: ranks are 1-based");
    mrr += 1.0 / static_cast<double>(r);
    if (r <= 1) ++h1;
    if (r <= 5) ++h5;
    if (r <= 10) ++h10;
  }
  double n = static_cast<double>(ranks.size());
  return {{"MRR", mrr / n}, {"Hit@1", h1 / n}, {"Hit@5", h5 / n}, {"Hit@10", h10 / n}};
}

double uniform_random_mrr(const std::vector<long>& candidate_sizes) {
  require(!candidate_sizes.empty(), "uniform_random_mrr: no candidate sets");
  double total = 0;
  for (long n : candidate_sizes) {
    require(n >= 1, "uniform_random_mrr: empty candidate set");
    double h = 0;
    for (long k = 1; k <= n; ++k) h += 1.0 / static_cast<double>(k);
    total += h / static_cast<double>(n);
  }
  return total / static_cast<double>(candidate_sizes.size());
}

KgcEvalResult kgc_evaluate(const KGDataset& kg, const PairEmbedder& pe, const GanModel& gan,
                           const io::EmbeddingTable& onto_embeddings,
                           const KgcEvalConfig& config) {
  require(config.partition == "test" || config.partition == "valid",
          "kgc_evaluate: unknown partition: " + config.partition);
  const auto& triples = config.partition == "test" ? kg.test_triples : kg.valid_triples;
  require(!triples.empty(), "kgc_evaluate: no triples in partition " + config.partition);
  require(gan.feature_dim == pe.model.pair_dim(),
          "kgc_evaluate: generator output does not match pair embedding dimension");

  // known tails for the filtered setting, over every split
  std::map<std::string, std::map<long, std::set<long>>> known;
  for (const auto* tri : {&kg.train_triples, &kg.valid_triples, &kg.test_triples})
    for (const Triple& t : *tri)
      known[t.property][kg.entity_index(t.head)].insert(kg.entity_index(t.tail));

  // optional type-constrained candidates per relation
  std::map<std::string, std::vector<long>> constrained;
  if (!config.candidates_path.empty()) {
    long lineno = 0;
    for (const std::string& line : io::read_lines(config.candidates_path)) {
      ++lineno;
      if (line.empty()) continue;
      auto tab = line.find('\t');
      if (tab == std::string::npos)
        throw Error(config.candidates_path + ":" + std::to_string(lineno) +
                    ": expected `relation TAB entity`");
      constrained[line.substr(0, tab)].push_back(kg.entity_index(line.substr(tab + 1)));
    }
  }
  std::vector<long> all_entities(kg.entities.size());
  for (size_t i = 0; i < all_entities.size(); ++i) all_entities[i] = static_cast<long>(i);

  PairEmbedder::Cache cache = pe.build_cache();

  // group queries by relation so each relation generates N_g embeddings once
  std::map<std::string, std::vector<const Triple*>> by_rel;
  for (const Triple& t : triples) by_rel[t.property].push_back(&t);

  KgcEvalResult result;
  std::map<std::string, std::vector<long>> ranks_by_rel;
  long rel_idx = 0;
  for (const auto& [rel, queries] : by_rel) {
    auto it = onto_embeddings.find(rel);
    require(it != onto_embeddings.end(), "kgc_evaluate: missing embedding for relation: " + rel);
    Tensor generated = generate(gan, it->second, config.n_g,
                                config.seed * 1000003u + static_cast<uint64_t>(rel_idx) + 1u);
    const std::vector<long>& cands =
        constrained.count(rel) ? constrained.at(rel) : all_entities;
    for (const Triple* q : queries) {
      long h = kg.entity_index(q->head);
      long gold = kg.entity_index(q->tail);
      std::set<long> filter = known.at(rel).at(h);
      filter.erase(gold);
      long rank = rank_tail(pe, cache, generated, h, gold, cands, filter);
      result.ranks.push_back(rank);
      ranks_by_rel[rel].push_back(rank);
      long kept = 0;
      for (long c : cands)
        if (c == gold || !filter.count(c)) ++kept;
      result.candidate_sizes.push_back(kept);
    }
    ++rel_idx;
  }

  result.report.task = "kgc";
  result.report.mode = "tail_ranking";
  result.report.seed = config.seed;
  result.report.metrics = kgc_metrics(result.ranks);
  for (const auto& [rel, rlist] : ranks_by_rel) {
    double mrr = 0;
    for (long r : rlist) mrr += 1.0 / static_cast<double>(r);
    result.report.per_class_accuracy[rel] = mrr / static_cast<double>(rlist.size());
  }
  return result;
}

void save_extractor(const std::string& path, const ExtractorModel& model) {
  io::write_checkpoint(path, {model.f1.W, model.f1.b, model.f2.W, model.f2.b});
}

ExtractorModel load_extractor(const std::string& path) {
  auto ts = io::read_checkpoint(path);
  require(ts.size() == 4, "extractor checkpoint: expected 4 weight tensors");
  ExtractorModel m;
  m.f1.W = ts[0];
  m.f1.b = ts[1];
  m.f2.W = ts[2];
  m.f2.b = ts[3];
  return m;
}

}  // namespace ontozsl
