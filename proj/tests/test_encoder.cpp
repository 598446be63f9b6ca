#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ontozsl/onto_encoder.hpp"
#include "ontozsl/rng.hpp"
#include "testutil.hpp"

using namespace ontozsl;
using testutil::TempDir;
using testutil::fd_check;
using testutil::write_file;

TEST_CASE("score_structural: exact translation scores zero") {
  Tensor ci = Tensor::row({0.2, -0.4, 1.0});
  Tensor p = Tensor::row({1.0, 0.5, -0.25});
  Tensor cj = Tensor::row({1.2, 0.1, 0.75});
  CHECK(score_structural(ci, p, cj) == doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("score_structural: hand-computed case") {
  CHECK(score_structural(Tensor::row({1, 0}), Tensor::row({0, 1}), Tensor::row({0, 0})) ==
        doctest::Approx(-std::sqrt(2.0)));
}

TEST_CASE("score_structural: invariant under coordinate permutation") {
  Rng rng(3);
  for (int it = 0; it < 20; ++it) {
    Tensor a = rng.normal_tensor(1, 6), p = rng.normal_tensor(1, 6), b = rng.normal_tensor(1, 6);
    std::vector<long> perm = rng.sample_without_replacement(6, 6);
    Tensor a2(1, 6), p2(1, 6), b2(1, 6);
    for (long i = 0; i < 6; ++i) {
      a2[i] = a[perm[i]];
      p2[i] = p[perm[i]];
      b2[i] = b[perm[i]];
    }
    CHECK(score_structural(a, p, b) == doctest::Approx(score_structural(a2, p2, b2)));
  }
}

TEST_CASE("score_full: degenerate equalities collapse to -||p||") {
  Tensor a = Tensor::row({0.3, -0.7, 0.1});
  Tensor p = Tensor::row({0.5, 0.25, -1.0});
  Tensor b(1, 3);
  for (long i = 0; i < 3; ++i) b[i] = a[i] + p[i];
  CHECK(score_full(a, a, p, b, b) == doctest::Approx(-p.l2_norm()).epsilon(1e-4));
}

TEST_CASE("score_full: all-zero inputs score zero") {
  Tensor z(1, 4, 0.0);
  CHECK(score_full(z, z, z, z, z) == doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("score_full never exceeds the structural term") {
  Rng rng(4);
  for (int it = 0; it < 50; ++it) {
    Tensor cis = rng.normal_tensor(1, 5), cit = rng.normal_tensor(1, 5);
    Tensor p = rng.normal_tensor(1, 5);
    Tensor cjs = rng.normal_tensor(1, 5), cjt = rng.normal_tensor(1, 5);
    CHECK(score_full(cis, cit, p, cjs, cjt) <= score_structural(cis, p, cjs) + 1e-12);
  }
}

TEST_CASE("score_full is translation invariant") {
  Rng rng(5);
  for (int it = 0; it < 20; ++it) {
    Tensor cis = rng.normal_tensor(1, 5), cit = rng.normal_tensor(1, 5);
    Tensor p = rng.normal_tensor(1, 5);
    Tensor cjs = rng.normal_tensor(1, 5), cjt = rng.normal_tensor(1, 5);
    Tensor shift = rng.normal_tensor(1, 5);
    auto shifted = [&](const Tensor& v) {
      Tensor out(1, 5);
      for (long i = 0; i < 5; ++i) out[i] = v[i] + shift[i];
      return out;
    };
    CHECK(score_full(shifted(cis), shifted(cit), p, shifted(cjs), shifted(cjt)) ==
          doctest::Approx(score_full(cis, cit, p, cjs, cjt)).epsilon(1e-9));
  }
}

namespace {

// a, b, c chain plus two attribute edges: the 5-concept training fixture
Schema five_concept_schema(TempDir& d) {
  write_file(d.path("t.tsv"),
             "a\tsubClassOf\tb\n"
             "b\tsubClassOf\tc\n"
             "a\thasAttr\tx\n"
             "b\thasAttr\ty\n");
  write_file(d.path("d.tsv"),
             "a\talpha small\n"
             "b\tbeta medium\n"
             "c\tgamma large\n"
             "x\tspots\n"
             "y\tstripes\n");
  write_file(d.path("g.tsv"), "subClassOf\thierarchy\nhasAttr\tattribute\n");
  return load_schema(d.path("t.tsv"), d.path("d.tsv"), d.path("g.tsv"));
}

WordVectors toy_word_vectors() {
  WordVectors wv;
  wv.dim = 4;
  Rng rng(42);
  for (const char* tok : {"alpha", "beta", "gamma", "small", "medium", "large", "spots",
                          "stripes"})
    wv.table[tok] = rng.normal_tensor(1, 4);
  return wv;
}

double held_in_hit_at_1(const Schema& schema, const EncoderResult& enc) {
  long hits = 0;
  for (const Triple& t : schema.triples) {
    std::string best;
    double best_score = -1e300;
    for (const std::string& cand : schema.concepts) {  // brute force over all concepts
      double s = enc.score(t.head, t.property, cand);
      if (s > best_score || (s == best_score && cand < best)) {
        best_score = s;
        best = cand;
      }
    }
    if (best == t.tail) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(schema.triples.size());
}

}  // namespace

TEST_CASE("encoder loss gradients match finite differences (Eq. 7 path)") {
  TempDir d("encfd");
  Schema schema = five_concept_schema(d);
  TextMatrix tm = text_vectors(schema, toy_word_vectors());

  for (const char* mode : {"text_aware", "default"}) {
    EncoderConfig cfg;
    cfg.mode = mode;
    cfg.dim = 4;
    cfg.seed = 9;
    Rng rng(cfg.seed);
    double bound = 6.0 / std::sqrt(static_cast<double>(cfg.dim));

    EncoderModel model;
    model.text_aware = cfg.text_aware();
    model.concepts.assign(schema.concepts.begin(), schema.concepts.end());
    model.properties = {"hasAttr", "subClassOf"};
    model.concept_emb = rng.uniform_tensor(5, cfg.dim, -bound, bound);
    model.property_emb = rng.uniform_tensor(2, cfg.dim, -bound, bound);
    model.proj_struct = make_linear(rng, cfg.dim, cfg.dim);
    model.proj_prop = make_linear(rng, cfg.dim, cfg.dim);
    model.proj_text = make_linear(rng, tm.dim, cfg.dim);

    Tensor text_rows(5, tm.dim, 0.0);
    for (long i = 0; i < 5; ++i) {
      const Tensor& r = tm.row(model.concepts[static_cast<size_t>(i)]);
      for (long j = 0; j < tm.dim; ++j) text_rows.at(i, j) = r[j];
    }

    EncoderBatch batch;
    batch.pos_h = {0, 1, 0, 1};
    batch.pos_p = {1, 1, 0, 0};
    batch.pos_t = {1, 2, 3, 4};
    batch.neg_h = {2, 1, 4, 0};
    batch.neg_t = {1, 0, 3, 2};

    auto collect = [&](EncoderModel& m) {
      std::vector<Tensor> th = {m.concept_emb, m.property_emb};
      if (m.text_aware)
        for (Tensor* t : {&m.proj_struct.W, &m.proj_struct.b, &m.proj_prop.W, &m.proj_prop.b,
                          &m.proj_text.W, &m.proj_text.b})
          th.push_back(*t);
      return th;
    };
    auto scatter = [&](EncoderModel& m, const std::vector<Tensor>& th) {
      m.concept_emb = th[0];
      m.property_emb = th[1];
      if (m.text_aware) {
        m.proj_struct.W = th[2];
        m.proj_struct.b = th[3];
        m.proj_prop.W = th[4];
        m.proj_prop.b = th[5];
        m.proj_text.W = th[6];
        m.proj_text.b = th[7];
      }
    };

    Graph g;
    ParamSet ps;
    NodeId loss = encoder_loss_graph(g, model, ps, text_rows, batch, 2.0);
    auto analytic = g.grad(loss, ps.nodes);
    auto theta = collect(model);
    auto f = [&](const std::vector<Tensor>& th) {
      EncoderModel m = model;
      scatter(m, th);
      Graph gg;
      ParamSet pp;
      return gg.value(encoder_loss_graph(gg, m, pp, text_rows, batch, 2.0))[0];
    };
    CHECK(fd_check(f, theta, analytic) < 1e-4);
  }
}

TEST_CASE("hinge is non-negative during training and margin satisfaction zeroes it") {
  // formula-level dead zone: positive beats negative by at least the margin
  Graph g;
  NodeId pos = g.constant(Tensor::scalar(-0.5));
  NodeId neg = g.constant(Tensor::scalar(-4.0));
  NodeId hinge = g.relu(g.add_scalar(g.sub(neg, pos), 2.0));  // 2 + (-4) - (-0.5) < 0
  CHECK(g.value(hinge)[0] == 0.0);
}

TEST_CASE("train_encoder on the 5-concept fixture ranks held-in tails") {
  TempDir d("enc5");
  Schema schema = five_concept_schema(d);
  TextMatrix tm = text_vectors(schema, toy_word_vectors());

  EncoderConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 500;
  cfg.batch = 128;
  cfg.lr = 0.05;
  cfg.margin = 2.0;
  cfg.seed = 7;
  EncoderResult enc = train_encoder(schema, tm, cfg);

  CHECK(held_in_hit_at_1(schema, enc) >= 0.8);

  // loss history is recorded, non-negative, and settles down
  REQUIRE(enc.loss_history.size() == 500);
  for (double l : enc.loss_history) CHECK(l >= 0.0);
  auto window_mean = [&](size_t from) {
    double s = 0;
    for (size_t i = from; i < from + 50; ++i) s += enc.loss_history[i];
    return s / 50.0;
  };
  CHECK(window_mean(450) <= window_mean(0));

  // table rows are the concatenated projections
  for (const auto& [id, vec] : enc.table) {
    (void)id;
    CHECK(vec.cols() == 2 * cfg.dim);
    CHECK(vec.all_finite());
  }
}

TEST_CASE("concepts without text still get finite embeddings") {
  TempDir d("notext");
  write_file(d.path("t.tsv"), "a\tsubClassOf\tb\nb\tsubClassOf\tc\n");
  write_file(d.path("d.tsv"), "a\tsomething alpha\n");  // b, c have no description
  write_file(d.path("g.tsv"), "subClassOf\thierarchy\n");
  Schema schema = load_schema(d.path("t.tsv"), d.path("d.tsv"), d.path("g.tsv"));
  WordVectors wv = toy_word_vectors();
  TextMatrix tm = text_vectors(schema, wv);

  EncoderConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 30;
  cfg.lr = 0.05;
  cfg.margin = 2.0;
  cfg.seed = 1;
  EncoderResult enc = train_encoder(schema, tm, cfg);
  for (const auto& [id, vec] : enc.table) {
    (void)id;
    CHECK(vec.all_finite());
  }
}

TEST_CASE("default mode trains structure only and keeps dim") {
  TempDir d("defmode");
  Schema schema = five_concept_schema(d);
  TextMatrix tm;  // unused in default mode
  EncoderConfig cfg;
  cfg.mode = "default";
  cfg.dim = 8;
  cfg.epochs = 50;
  cfg.lr = 0.05;
  cfg.margin = 2.0;
  cfg.seed = 3;
  EncoderResult enc = train_encoder(schema, tm, cfg);
  for (const auto& [id, vec] : enc.table) {
    (void)id;
    CHECK(vec.cols() == 8);
  }
}

TEST_CASE("train_encoder rejects an empty triple set") {
  Schema s;
  s.concepts = {"a"};
  TextMatrix tm;
  CHECK_THROWS_AS(train_encoder(s, tm, EncoderConfig{}), Error);
}
