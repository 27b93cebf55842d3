#include <gtest/gtest.h>

#include <cmath>

#include "mdtlab/error.hpp"
#include "mdtlab/nn/adam.hpp"
#include "mdtlab/nn/dense.hpp"
#include "mdtlab/nn/lstm.hpp"
#include "support.hpp"

using namespace mdtlab;
using namespace mdtlab::nn;

namespace {

constexpr double kProbe = 1e-5;
constexpr double kTol = 1e-4;

Matrix random_matrix(int r, int c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.normal(0.0, scale);
  return m;
}

Vector random_vector(int n, Rng& rng, double scale = 1.0) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal(0.0, scale);
  return v;
}

// Central difference of f at every coordinate of x.
template <class F>
Vector numeric_gradient(F f, Vector x) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x(i);
    x(i) = keep + kProbe;
    const double up = f(x);
    x(i) = keep - kProbe;
    const double down = f(x);
    x(i) = keep;
    g(i) = (up - down) / (2 * kProbe);
  }
  return g;
}

void expect_close(const Vector& analytic, const Vector& numeric, const std::string& what) {
  ASSERT_EQ(analytic.size(), numeric.size());
  for (Eigen::Index i = 0; i < analytic.size(); ++i)
    EXPECT_LE(test::rel_err(analytic(i), numeric(i), 1e-6), kTol) << what << " coordinate " << i;
}

}  // namespace

TEST(Dense, ZeroParametersGiveZeroOutput) {
  Rng rng(1);
  DenseNet net({4, 8, 8, 2}, rng);
  net.set_flat(Vector::Zero(static_cast<Eigen::Index>(net.n_params())));
  EXPECT_EQ(net.forward(Vector(random_vector(4, rng))), Vector::Zero(2));
}

TEST(Dense, OneByOneNetIsRelu) {
  Rng rng(1);
  DenseNet net({1, 1, 1}, rng);
  Vector p(4);
  p << 2.0, -1.0, 1.0, 0.0;  // hidden w, b, output w, b
  net.set_flat(p);
  for (double x : {-3.0, 0.0, 0.25, 2.0}) {
    Vector in(1);
    in << x;
    EXPECT_DOUBLE_EQ(net.forward(in)(0), std::max(0.0, 2.0 * x - 1.0));
  }
}

TEST(Dense, ShapeMismatchNamesLayer) {
  Rng rng(1);
  DenseNet net({3, 4, 2}, rng);
  try {
    (void)net.forward(Vector(Vector::Zero(5)));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("layer 0"), std::string::npos);
  }
}

TEST(Dense, GradientsMatchFiniteDifferences) {
  Rng rng(101);
  for (int inst = 0; inst < 25; ++inst) {
    const int in = 2 + static_cast<int>(rng.uniform_int(0, 3));
    const int hidden = 3 + static_cast<int>(rng.uniform_int(0, 4));
    const int out = 1 + static_cast<int>(rng.uniform_int(0, 2));
    const int batch = 1 + static_cast<int>(rng.uniform_int(0, 3));
    DenseNet net({in, hidden, hidden, out}, rng);
    Vector params = net.flat();
    for (Eigen::Index i = 0; i < params.size(); ++i) params(i) += rng.normal(0.0, 0.1);  // nonzero biases
    net.set_flat(params);
    const Matrix x = random_matrix(in, batch, rng);
    const Matrix w = random_matrix(out, batch, rng);  // loss = sum(w .* y)

    DenseNet::Cache cache;
    (void)net.forward(x, &cache);
    const auto grads = net.backward(cache, w);
    auto loss_params = [&](const Vector& p) {
      DenseNet probe = net;
      probe.set_flat(p);
      return probe.forward(x).cwiseProduct(w).sum();
    };
    expect_close(net.flatten(grads), numeric_gradient(loss_params, params), "dense params");

    const Eigen::Map<const Vector> x_flat(x.data(), x.size());
    auto loss_input = [&](const Vector& v) {
      const Matrix xi = Eigen::Map<const Matrix>(v.data(), in, batch);
      return net.forward(xi).cwiseProduct(w).sum();
    };
    const Eigen::Map<const Vector> dx(grads.dx.data(), grads.dx.size());
    expect_close(dx, numeric_gradient(loss_input, Vector(x_flat)), "dense input");
  }
}

TEST(Dense, FlatRoundTripAndJson) {
  Rng rng(4);
  DenseNet a({5, 7, 3}, rng);
  DenseNet b({5, 7, 3}, rng);
  EXPECT_FALSE(a == b);
  b.set_flat(a.flat());
  EXPECT_TRUE(a == b);
  DenseNet c({5, 7, 3}, rng);
  c.from_json(a.to_json("net"), "net");
  EXPECT_TRUE(a == c);
}

TEST(Lstm, ZeroWeightsGiveUniformPolicy) {
  Rng rng(2);
  LstmPolicyNet net(6, 5, rng);
  net.set_flat(Vector::Zero(static_cast<Eigen::Index>(net.n_params())));
  LstmPolicyNet::Cache cache;
  const auto s = net.step(random_vector(6, rng), Vector::Zero(5), Vector::Zero(5), &cache);
  EXPECT_EQ(s.h, Vector::Zero(5));
  EXPECT_EQ(s.c, Vector::Zero(5));
  EXPECT_EQ(s.logits, Vector::Zero(2));
  EXPECT_EQ(s.value, 0.0);
  for (int k = 0; k < 5; ++k) {
    EXPECT_DOUBLE_EQ(cache.i(k), 0.5);
    EXPECT_DOUBLE_EQ(cache.f(k), 0.5);
    EXPECT_DOUBLE_EQ(cache.o(k), 0.5);
    EXPECT_DOUBLE_EQ(cache.g(k), 0.0);
  }
}

TEST(Lstm, StepIsPure) {
  Rng rng(3);
  LstmPolicyNet net(4, 6, rng);
  const Vector x = random_vector(4, rng), h = random_vector(6, rng), c = random_vector(6, rng);
  const auto a = net.step(x, h, c), b = net.step(x, h, c);
  EXPECT_EQ(a.h, b.h);
  EXPECT_EQ(a.c, b.c);
  EXPECT_EQ(a.logits, b.logits);
  EXPECT_EQ(a.value, b.value);
}

TEST(Lstm, ShapeMismatchRejected) {
  Rng rng(3);
  LstmPolicyNet net(4, 6, rng);
  EXPECT_THROW(net.step(Vector::Zero(3), Vector::Zero(6), Vector::Zero(6)), ConfigError);
  EXPECT_THROW(net.step(Vector::Zero(4), Vector::Zero(5), Vector::Zero(6)), ConfigError);
}

TEST(Lstm, BpttMatchesFiniteDifferences) {
  Rng rng(202);
  for (int inst = 0; inst < 20; ++inst) {
    const int in = 2 + static_cast<int>(rng.uniform_int(0, 3));
    const int hidden = 2 + static_cast<int>(rng.uniform_int(0, 4));
    const int steps = 5;
    LstmPolicyNet net(in, hidden, rng);
    std::vector<Vector> xs, wl;
    std::vector<double> wv;
    for (int t = 0; t < steps; ++t) {
      xs.push_back(random_vector(in, rng));
      wl.push_back(random_vector(2, rng));
      wv.push_back(rng.normal());
    }
    auto rollout = [&](const LstmPolicyNet& n, std::vector<LstmPolicyNet::Cache>* caches) {
      Vector h = Vector::Zero(hidden), c = Vector::Zero(hidden);
      double loss = 0.0;
      for (int t = 0; t < steps; ++t) {
        LstmPolicyNet::Cache cache;
        const auto s = n.step(xs[t], h, c, caches ? &cache : nullptr);
        if (caches) caches->push_back(cache);
        loss += s.logits.dot(wl[t]) + wv[t] * s.value;
        h = s.h;
        c = s.c;
      }
      return loss;
    };
    std::vector<LstmPolicyNet::Cache> caches;
    (void)rollout(net, &caches);
    const Vector analytic = net.flatten(net.bptt(caches, wl, wv));
    auto loss = [&](const Vector& p) {
      LstmPolicyNet probe = net;
      probe.set_flat(p);
      return rollout(probe, nullptr);
    };
    expect_close(analytic, numeric_gradient(loss, net.flat()), "lstm");
  }
}

TEST(Lstm, JsonRoundTrip) {
  Rng rng(5);
  LstmPolicyNet a(7, 4, rng), b(7, 4, rng);
  b.from_json(a.to_json());
  EXPECT_TRUE(a == b);
}

TEST(Adam, FirstTwoStepsByHand) {
  AdamOptions opt;
  opt.learning_rate = 0.1;
  Adam adam(2, opt);
  Vector p(2), g(2);
  p << 1.0, -2.0;
  g << 0.5, -4.0;
  adam.step(p, g);
  // Bias-corrected moments equal g and g^2 after one step.
  EXPECT_NEAR(p(0), 1.0 - 0.1 * 0.5 / (0.5 + 1e-8), 1e-12);
  EXPECT_NEAR(p(1), -2.0 + 0.1 * 4.0 / (4.0 + 1e-8), 1e-12);
  Vector g2(2);
  g2 << 1.0, 0.0;
  const Vector before = p;
  adam.step(p, g2);
  for (int i = 0; i < 2; ++i) {
    const double m = (0.9 * 0.1 * g(i) + 0.1 * g2(i)) / (1 - 0.81);
    const double v = (0.999 * 0.001 * g(i) * g(i) + 0.001 * g2(i) * g2(i)) / (1 - 0.999 * 0.999);
    EXPECT_NEAR(p(i), before(i) - 0.1 * m / (std::sqrt(v) + 1e-8), 1e-12);
  }
  EXPECT_EQ(adam.steps(), 2);
}

TEST(Adam, SizeMismatchRejected) {
  Adam adam(3, {});
  Vector p = Vector::Zero(2), g = Vector::Zero(2);
  EXPECT_THROW(adam.step(p, g), ConfigError);
}

TEST(Adam, JsonRoundTripContinuesIdentically) {
  Rng rng(8);
  Adam a(4, {});
  Vector pa = random_vector(4, rng);
  a.step(pa, random_vector(4, rng));
  Adam b;
  b.from_json(a.to_json());
  Vector pb = pa;
  const Vector g = random_vector(4, rng);
  a.step(pa, g);
  b.step(pb, g);
  EXPECT_EQ(pa, pb);
}

TEST(Clip, ScalesToMaxNorm) {
  Vector g(2);
  g << 30.0, 40.0;
  EXPECT_DOUBLE_EQ(clip_by_global_norm(g, 5.0), 50.0);
  EXPECT_NEAR(g.norm(), 5.0, 1e-12);
  EXPECT_NEAR(g(0) / g(1), 0.75, 1e-12);
  Vector small(1);
  small << 0.5;
  clip_by_global_norm(small, 5.0);
  EXPECT_EQ(small(0), 0.5);
}
