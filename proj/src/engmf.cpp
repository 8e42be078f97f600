#include "mtt/engmf.hpp"

#include <cmath>
#include <stdexcept>

#include "mtt/laplace.hpp"
#include "mtt/parallel.hpp"

namespace mtt {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;

Mat6 apply_jitter(Mat6 P) {
  const Eigen::SelfAdjointEigenSolver<Mat6> es(P);
  const double emin = es.eigenvalues().minCoeff();
  const double emax = es.eigenvalues().maxCoeff();
  if (emax > 0.0 && emin < 1e-12 * emax) {
    P += (1e-10 * P.trace() / 6.0) * Mat6::Identity();
  }
  return P;
}
}  // namespace

void GaussianMixture::normalize_weights() {
  double s = 0.0;
  for (const auto& c : components) s += c.weight;
  if (s <= 0.0) throw std::runtime_error("mixture has no weight");
  for (auto& c : components) c.weight /= s;
}

VecX GaussianMixture::mean() const {
  VecX m = VecX::Zero(dim());
  for (const auto& c : components) m += c.weight * c.mean;
  return m;
}

MatX GaussianMixture::total_covariance() const {
  const VecX m = mean();
  MatX P = MatX::Zero(dim(), dim());
  for (const auto& c : components) {
    const VecX d = c.mean - m;
    P += c.weight * (c.cov + d * d.transpose());
  }
  return P;
}

Mat6 knn_gated_covariance(const KdTree& tree, int i, int k, bool jitter) {
  if (k < 2) throw std::invalid_argument("k must exceed 1");
  if (tree.size() <= k) throw std::invalid_argument("need more points than neighbors");
  const VecX q = tree.points().col(i);

  // h is the distance to the k-th nearest neighbor. The query point is
  // excluded, and zero-distance duplicates do not consume a rank (they
  // contribute nothing to the sum and would otherwise collapse the gate).
  std::vector<int> idx;
  std::vector<double> dist;
  int kk = k;
  double h = 0.0;
  while (true) {
    tree.knn(q, std::min(kk, tree.size() - 1), idx, dist, i);
    int nonzero = 0;
    for (double d : dist)
      if (d > 0.0) ++nonzero;
    if (nonzero >= k || static_cast<int>(dist.size()) >= tree.size() - 1) {
      int seen = 0;
      for (double d : dist) {
        if (d > 0.0 && ++seen == k) {
          h = d;
          break;
        }
      }
      if (h == 0.0 && !dist.empty()) h = dist.back();
      break;
    }
    kk = k + (static_cast<int>(dist.size()) - nonzero);
  }
  if (h == 0.0) return Mat6::Zero();  // every point coincides with the query

  std::vector<int> gated;
  tree.radius(q, h, gated, i);
  Mat6 P = Mat6::Zero();
  for (int j : gated) {
    const Vec6 d = tree.points().col(j) - q;
    P += d * d.transpose();
  }
  P /= (k - 1.0);
  return jitter ? apply_jitter(P) : P;
}

Mat6 knn_gated_covariance(const MatX& pts_canonical, int i, int k, bool jitter) {
  KdTree tree(pts_canonical);
  return knn_gated_covariance(tree, i, k, jitter);
}

GaussianMixture regularize(const MatX& states_physical, const VecX& weights, int k,
                           const CanonicalScaler& sc, int threads) {
  const int N = static_cast<int>(states_physical.cols());
  if (N <= k || k < 2) throw std::invalid_argument("need N > k >= 2");
  if (weights.size() != N) throw std::invalid_argument("one weight per particle");

  MatX canon(6, N);
  for (int i = 0; i < N; ++i) canon.col(i) = sc.to_canonical(states_physical.col(i));
  KdTree tree(canon);

  const Vec6 s = sc.phys_scale();
  GaussianMixture mix;
  mix.components.resize(N);
  parallel_for(N, threads, [&](int i) {
    const Mat6 Pc = knn_gated_covariance(tree, i, k);
    MixtureComponent& c = mix.components[i];
    c.mean = states_physical.col(i);
    c.cov = s.asDiagonal() * Pc * s.asDiagonal();
    c.weight = weights[i];
  });
  mix.normalize_weights();
  return mix;
}

Mat6 silverman_covariance(const MatX& states_physical, const VecX& weights) {
  const int N = static_cast<int>(states_physical.cols());
  if (N < 2) throw std::invalid_argument("need at least two particles");
  const double wsum = weights.sum();
  Vec6 mean = Vec6::Zero();
  for (int i = 0; i < N; ++i) mean += weights[i] / wsum * states_physical.col(i);
  Mat6 cov = Mat6::Zero();
  for (int i = 0; i < N; ++i) {
    const Vec6 d = states_physical.col(i) - mean;
    cov += weights[i] / wsum * d * d.transpose();
  }
  const double d = 6.0;
  const double beta = std::pow(4.0 / (d + 2.0), 2.0 / (d + 4.0));
  return beta * std::pow(static_cast<double>(N), -2.0 / (d + 4.0)) * cov;
}

Mat6 classic_knn_covariance(const KdTree& tree, int i, int k) {
  if (k < 2) throw std::invalid_argument("k must exceed 1");
  std::vector<int> idx;
  std::vector<double> dist;
  tree.knn(tree.points().col(i), k, idx, dist, i);
  return dist.back() * dist.back() * Mat6::Identity();
}

double mixture_logpdf(const GaussianMixture& mix, const VecX& x) {
  const int n = mix.size();
  VecX terms(n);
  for (int i = 0; i < n; ++i) {
    const auto& c = mix.components[i];
    Eigen::LLT<MatX> llt(c.cov);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("singular mixture component " + std::to_string(i));
    double logdet = 0.0;
    for (int j = 0; j < c.cov.rows(); ++j) logdet += 2.0 * std::log(llt.matrixL()(j, j));
    const VecX d = x - c.mean;
    terms[i] = std::log(c.weight) -
               0.5 * (c.cov.rows() * kLog2Pi + logdet + d.dot(llt.solve(d)));
  }
  return logsumexp(terms);
}

std::pair<double, double> mixture_total_sigma(const GaussianMixture& mix) {
  const MatX P = mix.total_covariance();
  return {std::sqrt(P.block<3, 3>(0, 0).trace()), std::sqrt(P.block<3, 3>(3, 3).trace())};
}

}  // namespace mtt
