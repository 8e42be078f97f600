#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mtt/engmf.hpp"
#include "mtt/kdtree.hpp"
#include "mtt/rng.hpp"

using namespace mtt;

namespace {

MatX random_cloud(int n, uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  MatX pts(6, n);
  for (int i = 0; i < n; ++i) pts.col(i) = scale * rng.normal_vec(6);
  return pts;
}

}  // namespace

TEST_CASE("canonical units: definition, round trip, vis-viva") {
  CanonicalScaler sc;
  Vec6 x;
  x << sc.Re, 0, 0, 0, std::sqrt(sc.mu / sc.Re), 0;
  const Vec6 c = sc.to_canonical(x);
  CHECK((c - (Vec6() << 1, 0, 0, 0, 1, 0).finished()).norm() < 1e-15);

  Rng rng(1);
  for (int i = 0; i < 10; ++i) {
    Vec6 y;
    y << 7000.0 * rng.normal3(), 7.0 * rng.normal3();
    CHECK((sc.from_canonical(sc.to_canonical(y)) - y).cwiseAbs().maxCoeff() <
          1e-13 * y.cwiseAbs().maxCoeff());
  }

  // Circular speed at radius Re maps to canonical speed 1.
  const double v_circ = std::sqrt(sc.mu / sc.Re);
  Vec6 z = Vec6::Zero();
  z[3] = v_circ;
  CHECK(sc.to_canonical(z)[3] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("kd-tree matches brute force") {
  const MatX pts = random_cloud(400, 9);
  KdTree tree(pts);
  Rng rng(10);
  for (int rep = 0; rep < 20; ++rep) {
    const VecX q = rng.normal_vec(6);
    std::vector<int> idx;
    std::vector<double> dist;
    const int k = 1 + static_cast<int>(rng.uniform() * 10);
    tree.knn(q, k, idx, dist);

    std::vector<std::pair<double, int>> ref;
    for (int i = 0; i < 400; ++i) ref.push_back({(pts.col(i) - q).norm(), i});
    std::sort(ref.begin(), ref.end());
    REQUIRE(static_cast<int>(idx.size()) == k);
    for (int i = 0; i < k; ++i) {
      CHECK(idx[i] == ref[i].second);
      CHECK(dist[i] == doctest::Approx(ref[i].first).epsilon(1e-12));
    }
  }

  // Exclusion and radius queries.
  std::vector<int> idx;
  std::vector<double> dist;
  tree.knn(pts.col(5), 3, idx, dist, 5);
  CHECK(std::find(idx.begin(), idx.end(), 5) == idx.end());

  std::vector<int> within;
  tree.radius(pts.col(5), dist.back(), within, 5);
  CHECK(within.size() >= 3);
  for (int j : within) CHECK((pts.col(j) - pts.col(5)).norm() <= dist.back() * (1 + 1e-12));
}

TEST_CASE("gated kNN covariance hand case: points 0,1,2 give P = 5") {
  MatX pts = MatX::Zero(6, 3);
  pts(0, 1) = 1.0;
  pts(0, 2) = 2.0;
  const Mat6 P = knn_gated_covariance(pts, 0, 2, /*jitter=*/false);
  CHECK(P(0, 0) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(P.norm() == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("duplicates at the query point do not change the covariance") {
  MatX pts = MatX::Zero(6, 4);
  pts(0, 1) = 1.0;
  pts(0, 2) = 2.0;
  // column 3 duplicates the query point -> zero displacement
  const Mat6 with_dup = knn_gated_covariance(pts, 0, 2, false);
  MatX pts3 = pts.leftCols(3);
  const Mat6 without = knn_gated_covariance(pts3, 0, 2, false);
  CHECK((with_dup - without).norm() < 1e-14);
}

TEST_CASE("collinear neighborhoods give rank-1 raw covariance, PD after jitter") {
  MatX pts = MatX::Zero(6, 6);
  for (int i = 0; i < 6; ++i) pts.col(i) = i * (VecX(6) << 1, 2, 0, 0, 0, 0).finished();
  const Mat6 raw = knn_gated_covariance(pts, 0, 3, false);
  Eigen::SelfAdjointEigenSolver<Mat6> es(raw);
  int rank = 0;
  for (int i = 0; i < 6; ++i)
    if (es.eigenvalues()[i] > 1e-12 * es.eigenvalues().maxCoeff()) ++rank;
  CHECK(rank == 1);

  const Mat6 fixed = knn_gated_covariance(pts, 0, 3, true);
  CHECK(Eigen::LLT<Mat6>(fixed).info() == Eigen::Success);
}

TEST_CASE("k below 2 is rejected") {
  const MatX pts = random_cloud(10, 2);
  CHECK_THROWS_WITH(knn_gated_covariance(pts, 0, 1, false), "k must exceed 1");
}

TEST_CASE("regularize: mean preservation and the law of total covariance") {
  const int N = 300, k = 20;
  CanonicalScaler sc;
  Rng rng(33);
  MatX states(6, N);
  VecX w(N);
  for (int i = 0; i < N; ++i) {
    states.col(i) << Vec3(7000, 100, -200) + 5.0 * rng.normal3(),
        Vec3(0.1, 7.4, 0.3) + 5e-3 * rng.normal3();
    w[i] = rng.uniform() + 0.1;
  }
  w /= w.sum();
  const GaussianMixture mix = regularize(states, w, k, sc);

  VecX pmean = VecX::Zero(6);
  for (int i = 0; i < N; ++i) pmean += w[i] * states.col(i);
  CHECK((mix.mean() - pmean).cwiseAbs().maxCoeff() < 1e-12 * pmean.cwiseAbs().maxCoeff());

  MatX pcov = MatX::Zero(6, 6);
  for (int i = 0; i < N; ++i) {
    const VecX d = states.col(i) - pmean;
    pcov += w[i] * d * d.transpose();
  }
  MatX kernel_sum = MatX::Zero(6, 6);
  for (int i = 0; i < N; ++i) kernel_sum += w[i] * mix.components[i].cov;
  const MatX expected = pcov + kernel_sum;
  CHECK((mix.total_covariance() - expected).norm() < 1e-12 * expected.norm());
}

TEST_CASE("kernels never span well-separated clusters when k < cluster size") {
  CanonicalScaler sc;
  Rng rng(44);
  const int per = 40;
  MatX states(6, 2 * per);
  const Vec6 offset = (Vec6() << 4000.0, 0, 0, 0, 0, 0).finished();
  for (int i = 0; i < per; ++i) {
    states.col(i) << Vec3(7000, 0, 0) + 1.0 * rng.normal3(), Vec3(0, 7.5, 0) + 1e-3 * rng.normal3();
    states.col(per + i) = states.col(i) + offset;
  }
  const VecX w = VecX::Constant(2 * per, 1.0 / (2 * per));
  const GaussianMixture mix = regularize(states, w, 10, sc);
  // Cluster separation is 4000 km; within-cluster spread ~1 km. Any kernel
  // spanning clusters would have a >= (4000/2)^2 variance along x.
  for (const auto& c : mix.components)
    CHECK(c.cov(0, 0) < 100.0);  // km^2
}

TEST_CASE("mean kernel size adapts to local density") {
  CanonicalScaler sc;
  Rng rng(55);
  const int N = 500;
  MatX states(6, N);
  for (int i = 0; i < N; ++i) {
    // Heavy-tailed cloud: dense core, sparse tails.
    const double tau = std::sqrt(rng.exponential());
    states.col(i) << Vec3(7000, 0, 0) + 2.0 * tau * rng.normal3(),
        Vec3(0, 7.5, 0) + 2e-3 * tau * rng.normal3();
  }
  const VecX w = VecX::Constant(N, 1.0 / N);
  const GaussianMixture mix = regularize(states, w, 25, sc);

  // Order particles by distance from the cloud center; compare kernel traces
  // of the densest and sparsest deciles.
  std::vector<std::pair<double, int>> by_radius;
  for (int i = 0; i < N; ++i)
    by_radius.push_back({(states.col(i).head<3>() - Vec3(7000, 0, 0)).norm(), i});
  std::sort(by_radius.begin(), by_radius.end());
  double dense = 0.0, sparse = 0.0;
  for (int i = 0; i < N / 10; ++i) {
    dense += mix.components[by_radius[i].second].cov.trace();
    sparse += mix.components[by_radius[N - 1 - i].second].cov.trace();
  }
  CHECK(dense < sparse);
}

TEST_CASE("Silverman kernel: explicit N scaling, classic kNN isotropy") {
  const MatX cloud = random_cloud(1000, 66, 3.0);
  const VecX w1000 = VecX::Constant(1000, 1e-3);
  const Mat6 h1000 = silverman_covariance(cloud, w1000);

  // Same empirical covariance, different N: the rule's N factor is explicit.
  Mat6 emp = Mat6::Zero();
  Vec6 mean = Vec6::Zero();
  for (int i = 0; i < 1000; ++i) mean += cloud.col(i) / 1000.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec6 d = cloud.col(i) - mean;
    emp += d * d.transpose() / 1000.0;
  }
  const double beta = std::pow(4.0 / 8.0, 0.2);
  CHECK((h1000 - beta * std::pow(1000.0, -0.2) * emp).norm() < 1e-12 * emp.norm());

  KdTree tree(cloud);
  const Mat6 classic = classic_knn_covariance(tree, 17, 9);
  CHECK((classic - classic(0, 0) * Mat6::Identity()).norm() == 0.0);
}

TEST_CASE("mixture pdf: mode value, tail safety, normalization") {
  GaussianMixture single;
  single.components.push_back({Vec6::Zero(), 0.25 * Mat6::Identity(), 1.0});
  const double at_mode = std::exp(mixture_logpdf(single, Vec6::Zero()));
  const double expect = std::pow(2.0 * M_PI, -3.0) / std::sqrt(std::pow(0.25, 6.0));
  CHECK(at_mode == doctest::Approx(expect).epsilon(1e-12));

  VecX far = VecX::Constant(6, 50.0);
  const double lp = mixture_logpdf(single, far);
  CHECK(std::isfinite(lp));
  CHECK(lp < -690.0);  // exp underflows but the log value is exact

  // Monte Carlo normalization with an independent Gaussian proposal.
  GaussianMixture mix;
  Rng rng(77);
  for (int i = 0; i < 5; ++i) {
    Mat6 P = Mat6::Identity() * (0.5 + rng.uniform());
    mix.components.push_back({rng.normal_vec(6), P, 0.2});
  }
  const VecX qmean = mix.mean();
  const MatX qcov = 2.0 * mix.total_covariance();
  const Eigen::LLT<MatX> qllt(qcov);
  double qlogdet = 0.0;
  for (int i = 0; i < 6; ++i) qlogdet += 2.0 * std::log(qllt.matrixL()(i, i));
  double acc = 0.0;
  const int M = 200000;
  for (int i = 0; i < M; ++i) {
    VecX z = rng.normal_vec(6);
    VecX x = qmean + qllt.matrixL() * z;
    const double logq =
        -0.5 * (6.0 * std::log(2.0 * M_PI) + qlogdet + z.squaredNorm());
    acc += std::exp(mixture_logpdf(mix, x) - logq);
  }
  CHECK(acc / M == doctest::Approx(1.0).epsilon(0.02));

  GaussianMixture bad;
  bad.components.push_back({Vec6::Zero(), Mat6::Zero(), 1.0});
  CHECK_THROWS_WITH(mixture_logpdf(bad, Vec6::Zero()), "singular mixture component 0");
}

TEST_CASE("total sigma: degenerate cases and regularization inflation") {
  GaussianMixture zero;
  zero.components.push_back({Vec6::Zero(), Mat6::Zero(), 1.0});
  const auto [sp, sv] = mixture_total_sigma(zero);
  CHECK(sp == 0.0);
  CHECK(sv == 0.0);

  CanonicalScaler sc;
  Rng rng(88);
  const int N = 200;
  MatX states(6, N);
  for (int i = 0; i < N; ++i)
    states.col(i) << Vec3(7000, 0, 0) + 3.0 * rng.normal3(), Vec3(0, 7.5, 0) + 3e-3 * rng.normal3();
  const VecX w = VecX::Constant(N, 1.0 / N);

  // Zero kernels: total sigma equals the particle-cloud sigma.
  GaussianMixture raw;
  for (int i = 0; i < N; ++i) raw.components.push_back({states.col(i), Mat6::Zero(), w[i]});
  const auto [sp_raw, sv_raw] = mixture_total_sigma(raw);
  const GaussianMixture reg = regularize(states, w, 15, sc);
  const auto [sp_reg, sv_reg] = mixture_total_sigma(reg);
  CHECK(sp_reg >= sp_raw);
  CHECK(sv_reg >= sv_raw);
}
