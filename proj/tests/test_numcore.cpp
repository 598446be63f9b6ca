#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <functional>

#include "ontozsl/adam.hpp"
#include "ontozsl/graph.hpp"
#include "ontozsl/nn.hpp"
#include "ontozsl/rng.hpp"
#include "testutil.hpp"

using namespace ontozsl;
using testutil::fd_check;
using testutil::fd_grad;
using testutil::max_rel_err;

TEST_CASE("grad of sum is ones") {
  Graph g;
  NodeId w = g.param(Tensor::row({0.3, -1.2, 4.0}));
  NodeId loss = g.sum(w);
  auto grads = g.grad(loss, {w});
  for (long i = 0; i < 3; ++i) CHECK(grads[0][i] == doctest::Approx(1.0));
}

TEST_CASE("grad of squared norm is 2w") {
  Graph g;
  Tensor wt = Tensor::row({0.5, -2.0, 1.5, 0.0});
  NodeId w = g.param(wt);
  NodeId loss = g.sum(g.square(w));
  auto grads = g.grad(loss, {w});
  for (long i = 0; i < 4; ++i) CHECK(grads[0][i] == doctest::Approx(2.0 * wt[i]));
}

TEST_CASE("grad rejects non-scalar loss and non-param nodes") {
  Graph g;
  NodeId w = g.param(Tensor::row({1.0, 2.0}));
  NodeId x = g.input(Tensor::row({1.0, 2.0}));
  NodeId v = g.square(w);
  CHECK_THROWS_AS((void)g.grad(v, {w}), Error);              // non-scalar loss
  CHECK_THROWS_AS((void)g.grad(g.sum(v), {x}), Error);       // not a parameter
  CHECK_THROWS_AS((void)g.grad(g.sum(v), {v}), Error);       // interior node
}

TEST_CASE("two-layer network gradient matches finite differences") {
  Rng rng(11);
  Tensor x = rng.normal_tensor(8, 5);
  Tensor y = rng.normal_tensor(8, 1);
  std::vector<Tensor> theta = {rng.uniform_tensor(5, 6, -0.5, 0.5), Tensor(1, 6, 0.1),
                               rng.uniform_tensor(6, 1, -0.5, 0.5), Tensor(1, 1, 0.0)};

  auto build = [&](Graph& g, const std::vector<Tensor>& th, std::vector<NodeId>* ids) {
    NodeId w1 = g.param(th[0]), b1 = g.param(th[1]), w2 = g.param(th[2]), b2 = g.param(th[3]);
    if (ids) *ids = {w1, b1, w2, b2};
    NodeId h = g.leaky_relu(g.add_rowvec(g.matmul(g.constant(x), w1), b1), 0.2);
    NodeId pred = g.add_rowvec(g.matmul(h, w2), b2);
    return g.mean(g.square(g.sub(pred, g.constant(y))));
  };

  Graph g;
  std::vector<NodeId> ids;
  NodeId loss = build(g, theta, &ids);
  auto analytic = g.grad(loss, ids);

  auto f = [&](const std::vector<Tensor>& th) {
    Graph gg;
    return gg.value(build(gg, th, nullptr))[0];
  };
  CHECK(fd_check(f, theta, analytic) < 1e-4);
}

TEST_CASE("input_grad_norm: linear critic") {
  Tensor at(4, 1, {0.5, -1.0, 2.0, 0.25});
  auto build = [&](Graph& g, const Tensor& av, NodeId* a_out, NodeId* x_out) {
    NodeId x = g.input(Tensor::row({0.3, 0.8, -0.2, 1.0}));
    NodeId a = g.param(av);
    if (a_out) *a_out = a;
    if (x_out) *x_out = x;
    return g.matmul(x, a);  // scalar
  };

  Graph g;
  NodeId a, x;
  NodeId d = build(g, at, &a, &x);
  NodeId nrm = g.input_grad_norm(d, x);
  CHECK(g.value(nrm)[0] == doctest::Approx(at.l2_norm()));

  NodeId penalty = g.square(g.add_scalar(nrm, -1.0));
  auto analytic = g.grad(penalty, {a});
  auto f = [&](const std::vector<Tensor>& th) {
    Graph gg;
    NodeId aa, xx;
    NodeId dd = build(gg, th[0], &aa, &xx);
    return gg.value(gg.square(gg.add_scalar(gg.input_grad_norm(dd, xx), -1.0)))[0];
  };
  CHECK(fd_check(f, {at}, analytic) < 1e-4);
}

TEST_CASE("input_grad_norm: quadratic critic gives ||x||") {
  Graph g;
  Tensor xt = Tensor::row({3.0, -4.0, 0.0});
  NodeId x = g.input(xt);
  NodeId d = g.scale(g.sum(g.square(x)), 0.5);
  NodeId nrm = g.input_grad_norm(d, x);
  CHECK(g.value(nrm)[0] == doctest::Approx(5.0));
}

TEST_CASE("input_grad_norm rejects non-leaf input") {
  Graph g;
  NodeId x = g.input(Tensor::row({1.0, 2.0}));
  NodeId y = g.square(x);
  NodeId out = g.sum(y);
  CHECK_THROWS_AS((void)g.input_grad_norm(out, y), Error);
}

TEST_CASE("gradient penalty of two-layer critic matches finite differences") {
  Rng rng(5);
  for (int inst = 0; inst < 5; ++inst) {
    Tensor xt = rng.normal_tensor(1, 6);
    std::vector<Tensor> theta;
    // keep preactivations away from the kink so central differences are valid
    while (true) {
      theta = {rng.uniform_tensor(6, 8, -0.8, 0.8), rng.uniform_tensor(1, 8, -0.3, 0.3),
               rng.uniform_tensor(8, 1, -0.8, 0.8), Tensor(1, 1, 0.0)};
      Tensor pre(1, 8, 0.0);
      for (long j = 0; j < 8; ++j) {
        for (long i = 0; i < 6; ++i) pre[j] += xt[i] * theta[0].at(i, j);
        pre[j] += theta[1][j];
      }
      double closest = 1e9;
      for (long j = 0; j < 8; ++j) closest = std::min(closest, std::abs(pre[j]));
      if (closest > 1e-3) break;
    }

    auto build = [&](Graph& g, const std::vector<Tensor>& th, std::vector<NodeId>* ids) {
      NodeId x = g.input(xt);
      NodeId w1 = g.param(th[0]), b1 = g.param(th[1]), w2 = g.param(th[2]), b2 = g.param(th[3]);
      if (ids) *ids = {w1, b1, w2, b2};
      NodeId h = g.leaky_relu(g.add_rowvec(g.matmul(x, w1), b1), 0.2);
      NodeId d = g.add_rowvec(g.matmul(h, w2), b2);
      return g.square(g.add_scalar(g.input_grad_norm(d, x), -1.0));
    };

    Graph g;
    std::vector<NodeId> ids;
    NodeId penalty = build(g, theta, &ids);
    auto analytic = g.grad(penalty, ids);
    auto f = [&](const std::vector<Tensor>& th) {
      Graph gg;
      return gg.value(build(gg, th, nullptr))[0];
    };
    CHECK(fd_check(f, theta, analytic) < 1e-3);
  }
}

TEST_CASE("every differentiable primitive passes finite differences") {
  Rng rng(99);
  double worst = 0.0;
  int instances = 0;

  // builder takes a graph and parameter nodes; scalarize with a fixed
  // random weighting so upstream adjoints are non-uniform
  auto check = [&](std::vector<Tensor> theta,
                   std::function<NodeId(Graph&, const std::vector<NodeId>&)> body) {
    Tensor weights;
    auto build = [&](Graph& g, const std::vector<Tensor>& th, std::vector<NodeId>* ids) {
      std::vector<NodeId> ps;
      for (const Tensor& t : th) ps.push_back(g.param(t));
      if (ids) *ids = ps;
      NodeId out = body(g, ps);
      if (weights.empty())
        weights = rng.uniform_tensor(g.value(out).rows(), g.value(out).cols(), -1.0, 1.0);
      return g.sum(g.mul(out, g.constant(weights)));
    };
    Graph g;
    std::vector<NodeId> ids;
    NodeId loss = build(g, theta, &ids);
    auto analytic = g.grad(loss, ids);
    auto f = [&](const std::vector<Tensor>& th) {
      Graph gg;
      return gg.value(build(gg, th, nullptr))[0];
    };
    worst = std::max(worst, fd_check(f, theta, analytic));
    ++instances;
  };

  auto rnd = [&](long r, long c) { return rng.uniform_tensor(r, c, -2.0, 2.0); };
  auto rnd_away_from_zero = [&](long r, long c, double lo, double hi) {
    Tensor t(r, c);
    for (long i = 0; i < t.size(); ++i) t[i] = (rng.coin() ? 1.0 : -1.0) * rng.uniform(lo, hi);
    return t;
  };

  for (int it = 0; it < 6; ++it) {
    check({rnd(3, 4), rnd(3, 4)}, [](Graph& g, auto& p) { return g.add(p[0], p[1]); });
    check({rnd(3, 4), rnd(3, 4)}, [](Graph& g, auto& p) { return g.sub(p[0], p[1]); });
    check({rnd(3, 4), rnd(3, 4)}, [](Graph& g, auto& p) { return g.mul(p[0], p[1]); });
    check({rnd(3, 4), rnd_away_from_zero(3, 4, 0.5, 2.0)},
          [](Graph& g, auto& p) { return g.div(p[0], p[1]); });
    check({rnd(3, 4), rnd(1, 4)}, [](Graph& g, auto& p) { return g.add_rowvec(p[0], p[1]); });
    check({rnd(3, 4)}, [](Graph& g, auto& p) { return g.scale(p[0], -1.7); });
    check({rnd(3, 4)}, [](Graph& g, auto& p) { return g.add_scalar(p[0], 2.5); });
    check({rnd(3, 4), rnd(4, 2)}, [](Graph& g, auto& p) { return g.matmul(p[0], p[1]); });
    check({rnd(3, 4)}, [](Graph& g, auto& p) { return g.transpose(p[0]); });
    check({rnd(3, 2), rnd(3, 3)}, [](Graph& g, auto& p) { return g.concat_cols(p[0], p[1]); });
    check({rnd(2, 4), rnd(3, 4)}, [](Graph& g, auto& p) { return g.concat_rows(p[0], p[1]); });
    check({rnd(3, 5)}, [](Graph& g, auto& p) { return g.slice_cols(p[0], 1, 3); });
    check({rnd(3, 2)}, [](Graph& g, auto& p) { return g.pad_cols(p[0], 1, 5); });
    check({rnd(5, 3)},
          [](Graph& g, auto& p) { return g.gather_rows(p[0], {1, 3, 3, 0}); });
    check({rnd(4, 3)},
          [](Graph& g, auto& p) { return g.scatter_rows(p[0], {2, 0, 2, 5}, 6); });
    check({rnd(4, 5)},
          [](Graph& g, auto& p) { return g.take_per_row(p[0], {0, 4, 2, 2}); });
    check({rnd(4, 1)},
          [](Graph& g, auto& p) { return g.scatter_per_row(p[0], {3, 0, 1, 3}, 5); });
    check({rnd(3, 4)}, [](Graph& g, auto& p) { return g.sum(p[0]); });
    check({rnd(3, 4)}, [](Graph& g, auto& p) { return g.mean(p[0]); });
    check({rnd(3, 4)}, [](Graph& g, auto& p) { return g.row_sum(p[0]); });
    check({rnd(3, 4)}, [](Graph& g, auto& p) { return g.col_sum(p[0]); });
    check({rnd(3, 1)}, [](Graph& g, auto& p) { return g.broadcast_cols(p[0], 4); });
    check({rnd(1, 4)}, [](Graph& g, auto& p) { return g.broadcast_rows(p[0], 3); });
    check({rnd(1, 1)}, [](Graph& g, auto& p) { return g.broadcast_full(p[0], 3, 4); });
    check({rnd(3, 4)}, [](Graph& g, auto& p) { return g.tanh_(p[0]); });
    check({rnd(3, 4)}, [](Graph& g, auto& p) { return g.exp_(p[0]); });
    check({rng.uniform_tensor(3, 4, 0.2, 3.0)},
          [](Graph& g, auto& p) { return g.log_(p[0]); });
    check({rng.uniform_tensor(3, 4, 0.2, 3.0)},
          [](Graph& g, auto& p) { return g.sqrt_(p[0]); });
    check({rnd(3, 4)}, [](Graph& g, auto& p) { return g.square(p[0]); });
    check({rnd_away_from_zero(3, 4, 0.05, 2.0)},
          [](Graph& g, auto& p) { return g.leaky_relu(p[0], 0.2); });
  }
  CHECK(instances >= 100);
  CHECK(worst < 1e-4);
}

TEST_CASE("softmax NLL matches finite differences") {
  Rng rng(17);
  Tensor logits_param = rng.normal_tensor(6, 4);
  std::vector<long> gold = {0, 3, 2, 2, 1, 0};
  auto build = [&](Graph& g, const std::vector<Tensor>& th, std::vector<NodeId>* ids) {
    NodeId lg = g.param(th[0]);
    if (ids) *ids = {lg};
    return softmax_nll(g, lg, gold);
  };
  Graph g;
  std::vector<NodeId> ids;
  NodeId loss = build(g, {logits_param}, &ids);
  auto analytic = g.grad(loss, ids);
  auto f = [&](const std::vector<Tensor>& th) {
    Graph gg;
    return gg.value(build(gg, th, nullptr))[0];
  };
  CHECK(fd_check(f, {logits_param}, analytic) < 1e-4);
}

TEST_CASE("same seed twice gives bit-identical losses and gradients") {
  auto run = [&](uint64_t seed) {
    Rng rng(seed);
    Graph g;
    NodeId x = g.constant(rng.normal_tensor(4, 3));
    NodeId w1 = g.param(rng.uniform_tensor(3, 5, -1, 1));
    NodeId b1 = g.param(rng.uniform_tensor(1, 5, -1, 1));
    NodeId h = g.tanh_(g.add_rowvec(g.matmul(x, w1), b1));
    NodeId loss = g.mean(g.square(h));
    auto grads = g.grad(loss, {w1, b1});
    std::vector<double> bits = {g.value(loss)[0]};
    for (const auto& t : grads)
      for (long i = 0; i < t.size(); ++i) bits.push_back(t[i]);
    return bits;
  };
  auto a = run(123), b = run(123);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i)
    CHECK(std::memcmp(&a[i], &b[i], sizeof(double)) == 0);
}

TEST_CASE("non-finite values are rejected at operation boundaries") {
  Graph g;
  NodeId x = g.param(Tensor::row({1.0, 0.0}));
  CHECK_THROWS_AS((void)g.log_(x), Error);  // log(0) = -inf
  CHECK_THROWS_AS((void)g.constant(Tensor::row({std::nan(""), 1.0})), Error);
}

TEST_CASE("adam: zero gradient on fresh state leaves parameters unchanged") {
  Tensor p = Tensor::row({1.0, -2.0, 3.0});
  Tensor before = p;
  AdamState st;
  Adam opt(0.1);
  opt.step({&p}, {Tensor(1, 3, 0.0)}, st);
  for (long i = 0; i < 3; ++i) CHECK(p[i] == before[i]);
}

TEST_CASE("adam: constant gradient moves parameters opposite to its sign") {
  Tensor p = Tensor::row({0.0, 0.0});
  Tensor gconst = Tensor::row({0.7, -1.3});
  AdamState st;
  Adam opt(0.01);
  for (int i = 0; i < 50; ++i) opt.step({&p}, {gconst}, st);
  CHECK(p[0] < 0.0);
  CHECK(p[1] > 0.0);
}

TEST_CASE("adam: first step magnitude is about lr") {
  Tensor p = Tensor::row({5.0, 5.0});
  Tensor grd = Tensor::row({0.3, -40.0});
  AdamState st;
  Adam opt(0.001);
  opt.step({&p}, {grd}, st);
  // mhat = g, vhat = g^2, so the step is lr * sign(g) up to eps
  CHECK(p[0] == doctest::Approx(5.0 - 0.001).epsilon(1e-4));
  CHECK(p[1] == doctest::Approx(5.0 + 0.001).epsilon(1e-4));
}

TEST_CASE("adam rejects shape mismatch") {
  Tensor p = Tensor::row({1.0, 2.0});
  AdamState st;
  Adam opt(0.1);
  CHECK_THROWS_AS(opt.step({&p}, {Tensor(1, 3, 0.0)}, st), Error);
}
