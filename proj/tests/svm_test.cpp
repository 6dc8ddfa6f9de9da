#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "signbench/rng.hpp"
#include "signbench/svm.hpp"
#include "test_util.hpp"

using namespace signbench;

namespace {

// Two Gaussian-ish blobs, linearly separable with margin.
struct Blobs {
  std::vector<double> X;
  std::vector<int> y;
  std::size_t n = 0, dim = 0;
};

Blobs make_blobs(SeededRng& rng, std::size_t per_class, std::size_t dim, double gap) {
  Blobs b;
  b.dim = dim;
  b.n = 2 * per_class;
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    int label = i < per_class ? 1 : -1;
    b.y.push_back(label);
    for (std::size_t d = 0; d < dim; ++d) {
      double centre = d == 0 ? gap * label : 0.0;
      b.X.push_back(centre + rng.uniform(-1.0, 1.0));
    }
  }
  return b;
}

std::vector<double> explicit_w(const BinarySvmModel<double>& model) {
  std::vector<double> w(model.dim, 0.0);
  for (std::size_t i = 0; i < model.count(); ++i)
    for (std::size_t d = 0; d < model.dim; ++d) w[d] += model.dual_coefs[i] * model.sv(i)[d];
  return w;
}

}  // namespace

TEST(Kernel, ClosedForms) {
  std::vector<double> x = {1, 2}, y = {3, 4};
  KernelSpec lin{KernelSpec::Kind::linear};
  EXPECT_DOUBLE_EQ(kernel_eval(lin, x, y), 11.0);

  KernelSpec rbf{KernelSpec::Kind::rbf, 0.7};
  EXPECT_DOUBLE_EQ(kernel_eval(rbf, x, x), 1.0);

  KernelSpec inter{KernelSpec::Kind::intersection};
  std::vector<double> a = {0.2, 0.8}, b = {0.5, 0.5};
  EXPECT_DOUBLE_EQ(kernel_eval(inter, a, b), 0.7);

  KernelSpec sig{KernelSpec::Kind::sigmoid, 0.5, 0.25};
  EXPECT_NEAR(kernel_eval(sig, x, y), std::tanh(0.5 * 11.0 + 0.25), 1e-14);

  KernelSpec chi{KernelSpec::Kind::chi2, 1.0};
  EXPECT_NEAR(kernel_eval(chi, a, a), 1.0, 1e-12);
}

TEST(Kernel, ContractErrors) {
  std::vector<double> neg = {-0.1, 0.5}, pos = {0.2, 0.3};
  KernelSpec chi{KernelSpec::Kind::chi2, 1.0};
  KernelSpec inter{KernelSpec::Kind::intersection};
  EXPECT_THROW(kernel_eval(chi, neg, pos), Error);
  EXPECT_THROW(kernel_eval(inter, pos, neg), Error);
  std::vector<double> shorter = {0.1};
  EXPECT_THROW(kernel_eval(chi, pos, shorter), Error);
  EXPECT_THROW(KernelSpec::parse("poly"), ConfigError);
}

TEST(Kernel, SymmetryOnRandomInputs) {
  SeededRng rng(17, 0);
  const KernelSpec specs[] = {
      {KernelSpec::Kind::linear}, {KernelSpec::Kind::rbf, 0.9},
      {KernelSpec::Kind::sigmoid, 0.3, 0.1}, {KernelSpec::Kind::chi2, 2.0},
      {KernelSpec::Kind::intersection}};
  for (const auto& spec : specs) {
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> x(10), y(10);
      for (std::size_t i = 0; i < 10; ++i) {
        x[i] = rng.uniform(0, 1);
        y[i] = rng.uniform(0, 1);
      }
      ASSERT_NEAR(kernel_eval(spec, x, y), kernel_eval(spec, y, x), 1e-12) << spec.name();
    }
  }
}

TEST(Kernel, GramPositiveSemidefiniteOnHistograms) {
  SeededRng rng(23, 1);
  const std::size_t n = 20, dim = 12;
  std::vector<double> hists(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0;
    for (std::size_t d = 0; d < dim; ++d) {
      hists[i * dim + d] = rng.uniform(0, 1);
      total += hists[i * dim + d];
    }
    for (std::size_t d = 0; d < dim; ++d) hists[i * dim + d] /= total;
  }
  const KernelSpec specs[] = {{KernelSpec::Kind::linear},
                              {KernelSpec::Kind::rbf, 1.0 / dim},
                              {KernelSpec::Kind::chi2, 1.0 / dim},
                              {KernelSpec::Kind::intersection}};
  for (const auto& spec : specs) {
    auto gram = gram_matrix(spec, hists.data(), n, dim);
    std::vector<std::vector<double>> m(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m[i][j] = gram[i * n + j];
    auto eig = testutil::symmetric_eigenvalues(m);
    for (double e : eig) ASSERT_GE(e, -1e-8) << spec.name();
  }
}

// Two points on the line: the dual solves analytically to alpha = 0.5 each,
// giving f(x) = x (w = 1, b = 0) and margin 2.
TEST(SvmTrain, TwoPointAnalyticInstance) {
  std::vector<double> X = {-1.0, 1.0};
  std::vector<int> y = {-1, 1};
  SvmTrainOptions opt;
  opt.c = 10.0;
  auto model = svm_train_binary(X.data(), y, 1, KernelSpec{KernelSpec::Kind::linear}, opt);
  ASSERT_TRUE(model.converged);
  ASSERT_EQ(model.count(), 2u);
  for (double c : model.dual_coefs) EXPECT_NEAR(std::fabs(c), 0.5, 1e-3);
  auto w = explicit_w(model);
  EXPECT_NEAR(w[0], 1.0, 1e-3);
  EXPECT_NEAR(model.bias, 0.0, 1e-3);

  double probe = 2.0;
  EXPECT_NEAR(svm_decision(model, &probe, 1), 2.0, 1e-3);
  double margin = 2.0 / std::fabs(w[0]);
  EXPECT_NEAR(margin, 2.0, 1e-2);
}

// Six points whose max-margin separator is known analytically: w = (1,0),
// b = 0, supported by (1,0) and (-1,0).
TEST(SvmTrain, SixPointMaxMargin) {
  std::vector<double> X = {1, 0, 2, 1, 2, -1, -1, 0, -2, 1, -2, -1};
  std::vector<int> y = {1, 1, 1, -1, -1, -1};
  SvmTrainOptions opt;
  opt.c = 10.0;
  auto model = svm_train_binary(X.data(), y, 2, KernelSpec{KernelSpec::Kind::linear}, opt);
  auto w = explicit_w(model);
  EXPECT_NEAR(w[0], 1.0, 1e-3);
  EXPECT_NEAR(w[1], 0.0, 1e-3);
  EXPECT_NEAR(model.bias, 0.0, 1e-3);
  for (std::size_t i = 0; i < 6; ++i) {
    double f = svm_decision(model, X.data() + i * 2, 2);
    EXPECT_GT(f * y[i], 0.0) << "training point " << i;
  }
  // Midway between the closest opposite-class points along w.
  double mid[2] = {0.0, 0.3};
  EXPECT_NEAR(svm_decision(model, mid, 2), 0.0, 1e-3);
}

TEST(SvmTrain, ContractErrors) {
  std::vector<double> X = {0, 1, 2};
  EXPECT_THROW(svm_train_binary(X.data(), std::vector<int>{1, 1, 1}, 1,
                                KernelSpec{KernelSpec::Kind::linear}),
               Error);
  SvmTrainOptions bad;
  bad.c = 0.0;
  EXPECT_THROW(svm_train_binary(X.data(), std::vector<int>{1, -1, 1}, 1,
                                KernelSpec{KernelSpec::Kind::linear}, bad),
               Error);
  EXPECT_THROW(svm_train_binary(X.data(), std::vector<int>{1, -1, 2}, 1,
                                KernelSpec{KernelSpec::Kind::linear}),
               Error);
}

TEST(SvmTrain, DualFeasibilityAndKktOnRandomSeparable) {
  SeededRng rng(99, 0);
  for (int inst = 0; inst < 10; ++inst) {
    auto blobs = make_blobs(rng, 12, 3, 4.0);
    SvmTrainOptions opt;
    opt.c = 1.0;
    auto model =
        svm_train_binary(blobs.X.data(), blobs.y, blobs.dim,
                         KernelSpec{KernelSpec::Kind::rbf, 0.5}, opt);
    ASSERT_TRUE(model.converged);

    double sum_ay = 0.0;
    for (double c : model.dual_coefs) {
      ASSERT_LE(std::fabs(c), opt.c + 1e-9);  // 0 <= alpha <= C
      sum_ay += c;
    }
    ASSERT_NEAR(sum_ay, 0.0, 1e-8);

    // Free support vectors sit on the margin within the KKT tolerance.
    for (std::size_t i = 0; i < model.count(); ++i) {
      double a = std::fabs(model.dual_coefs[i]);
      if (a > 1e-6 && a < opt.c - 1e-6) {
        double f = svm_decision(model, model.sv(i), model.dim);
        int yi = model.dual_coefs[i] > 0 ? 1 : -1;
        ASSERT_NEAR(f, double(yi), opt.tolerance + 1e-6);
      }
    }

    ASSERT_GE(svm_dual_objective(model), 0.0);  // beats the zero vector
  }
}

TEST(SvmTrain, LinearNormIdentityAndExplicitW) {
  SeededRng rng(1234, 0);
  auto blobs = make_blobs(rng, 15, 4, 3.0);
  SvmTrainOptions opt;
  opt.c = 2.0;
  auto model = svm_train_binary(blobs.X.data(), blobs.y, blobs.dim,
                                KernelSpec{KernelSpec::Kind::linear}, opt);
  auto w = explicit_w(model);
  double w_norm2 = 0.0;
  for (double v : w) w_norm2 += v * v;

  double quad = 0.0;
  for (std::size_t i = 0; i < model.count(); ++i)
    for (std::size_t j = 0; j < model.count(); ++j) {
      double dot = 0.0;
      for (std::size_t d = 0; d < model.dim; ++d) dot += model.sv(i)[d] * model.sv(j)[d];
      quad += model.dual_coefs[i] * model.dual_coefs[j] * dot;
    }
  EXPECT_NEAR(quad, w_norm2, 1e-9);

  // Kernel decision equals the explicit affine form.
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(blobs.dim);
    for (auto& v : x) v = rng.uniform(-4, 4);
    double f_kernel = svm_decision(model, x.data(), blobs.dim);
    double f_affine = model.bias;
    for (std::size_t d = 0; d < blobs.dim; ++d) f_affine += w[d] * x[d];
    ASSERT_NEAR(f_kernel, f_affine, 1e-9);
  }
}

TEST(Ova, ThreeClassToyAndErrors) {
  // Three tight clusters of three points each.
  std::vector<double> X;
  std::vector<int> labels;
  const double centres[3][2] = {{0, 0}, {6, 0}, {0, 6}};
  SeededRng rng(3, 3);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 3; ++i) {
      X.push_back(centres[c][0] + rng.uniform(-0.5, 0.5));
      X.push_back(centres[c][1] + rng.uniform(-0.5, 0.5));
      labels.push_back(c);
    }
  SvmTrainOptions opt;
  opt.c = 10.0;
  auto model = ova_train(X.data(), labels, 2, 3, KernelSpec{KernelSpec::Kind::rbf, 0.5}, opt);
  for (std::size_t i = 0; i < labels.size(); ++i)
    EXPECT_EQ(ova_predict(model, X.data() + i * 2), labels[i]);

  EXPECT_EQ(ova_evaluate(model, X, labels), 1.0);

  std::vector<int> missing = labels;
  for (auto& l : missing)
    if (l == 2) l = 1;
  EXPECT_THROW(ova_train(X.data(), missing, 2, 3, KernelSpec{KernelSpec::Kind::linear}, opt),
               Error);
  EXPECT_THROW(ova_train(X.data(), labels, 2, 1, KernelSpec{KernelSpec::Kind::linear}, opt),
               Error);
}

TEST(Ova, TwoClassAgreesWithDominantBinaryModel) {
  SeededRng rng(500, 1);
  auto blobs = make_blobs(rng, 10, 2, 3.0);
  std::vector<int> labels(blobs.n);
  for (std::size_t i = 0; i < blobs.n; ++i) labels[i] = blobs.y[i] > 0 ? 0 : 1;
  auto model =
      ova_train(blobs.X.data(), labels, blobs.dim, 2, KernelSpec{KernelSpec::Kind::linear});
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> q = {rng.uniform(-5, 5), rng.uniform(-2, 2)};
    double d0 = svm_decision(model.per_class[0], q.data(), 2);
    double d1 = svm_decision(model.per_class[1], q.data(), 2);
    int expect = d0 >= d1 ? 0 : 1;
    ASSERT_EQ(ova_predict(model, q.data()), expect);
  }
}

TEST(Ova, SerialisationRoundTrip) {
  SeededRng rng(42, 42);
  std::vector<double> X;
  std::vector<int> labels;
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 6; ++i) {
      X.push_back(c * 4.0 + rng.uniform(0, 1));
      X.push_back(rng.uniform(0, 1));
      labels.push_back(c);
    }
  auto model = ova_train(X.data(), labels, 2, 2, KernelSpec{KernelSpec::Kind::rbf, 0.8});

  auto path = (std::filesystem::temp_directory_path() / "svm_test.ovas").string();
  save_ova_model(model, path);
  auto loaded = load_ova_model<double>(path);
  EXPECT_EQ(loaded.class_count, model.class_count);
  EXPECT_EQ(loaded.dim, model.dim);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> q = {rng.uniform(-1, 5), rng.uniform(0, 1)};
    EXPECT_EQ(ova_predict(loaded, q.data()), ova_predict(model, q.data()));
    EXPECT_NEAR(svm_decision(loaded.per_class[0], q.data(), 2),
                svm_decision(model.per_class[0], q.data(), 2), 1e-5);
  }
  std::filesystem::remove(path);
}
