#include "mtt/collocation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mtt/parallel.hpp"

namespace mtt {

VecX MFInterpolant::coefficients(const VecX& x_low) const {
  if (x_low.size() != node_low.rows())
    throw std::invalid_argument("query dimension does not match node dimension");
  const int r = rank();
  for (int i = 0; i < r; ++i)
    if (!(L(i, i) > 0.0) || !std::isfinite(L(i, i)))
      throw std::runtime_error("rank deficient interpolant");
  // g_n = <query, node_n> in the scaled metric
  VecX q = x_low;
  if (row_scale.size() > 0) q = (row_scale.array() * row_scale.array()).matrix().asDiagonal() * q;
  const VecX g = node_low.transpose() * q;
  const VecX y = L.triangularView<Eigen::Lower>().solve(g);
  return L.transpose().triangularView<Eigen::Upper>().solve(y);
}

VecX MFInterpolant::synthesize(const VecX& c) const {
  if (!has_high()) throw std::logic_error("high-fidelity node outputs not populated");
  if (c.size() != node_high.cols()) throw std::invalid_argument("coefficient size mismatch");
  return node_high * c;
}

VecX stacked_state_row_scale(int n_epochs, double Re, double mu) {
  VecX s(6 * n_epochs);
  const double vs = std::sqrt(Re / mu);
  for (int e = 0; e < n_epochs; ++e) {
    s.segment<3>(6 * e).setConstant(1.0 / Re);
    s.segment<3>(6 * e + 3).setConstant(vs);
  }
  return s;
}

MFInterpolant select_nodes(const MatX& X_low, int r, const VecX& row_scale) {
  const int N = static_cast<int>(X_low.cols());
  const int m = static_cast<int>(X_low.rows());
  if (r < 1 || r > N) throw std::invalid_argument("need 1 <= r <= N");
  if (row_scale.size() > 0 && row_scale.size() != m)
    throw std::invalid_argument("row_scale size mismatch");

  // Scaled columns define the inner-product metric.
  MatX Xs = X_low;
  if (row_scale.size() > 0) Xs = row_scale.asDiagonal() * Xs;

  MFInterpolant out;
  out.row_scale = row_scale;

  // Partial pivoted Cholesky of G = Xs^T Xs without forming G. The residual
  // diagonal after j pivots is the squared distance of each column to the
  // span of the selected ones, so the pivot order realizes the greedy
  // max-distance selection.
  VecX diag(N);
  for (int i = 0; i < N; ++i) diag[i] = Xs.col(i).squaredNorm();
  MatX Lfull(N, r);
  std::vector<char> used(N, 0);
  double first_pivot = -1.0;

  for (int j = 0; j < r; ++j) {
    int p = -1;
    double best = -1.0;
    for (int i = 0; i < N; ++i)
      if (!used[i] && diag[i] > best) {
        best = diag[i];
        p = i;
      }
    if (first_pivot < 0.0) first_pivot = best;
    if (p < 0 || best <= 1e-12 * first_pivot || !(best > 0.0)) {
      out.rank_deficient = true;
      break;
    }
    const double piv = std::sqrt(best);
    VecX col = Xs.transpose() * Xs.col(p);
    if (j > 0)
      col.noalias() -= Lfull.leftCols(j) * Lfull.row(p).head(j).transpose();
    Lfull.col(j) = col / piv;
    for (int i = 0; i < N; ++i)
      if (!used[i]) diag[i] -= Lfull(i, j) * Lfull(i, j);
    used[p] = 1;
    out.node_ids.push_back(p);
    out.pivots.push_back(best);
  }

  const int rr = out.rank();
  out.L = MatX::Zero(rr, rr);
  for (int a = 0; a < rr; ++a)
    for (int b = 0; b <= a; ++b) out.L(a, b) = Lfull(out.node_ids[a], b);
  out.node_low.resize(m, rr);
  for (int a = 0; a < rr; ++a) out.node_low.col(a) = X_low.col(out.node_ids[a]);
  return out;
}

EnsemblePropagation mf_propagate_ensemble(const std::vector<Particle>& particles,
                                          double t0, double tf,
                                          const ForceModelConfig& low_cfg,
                                          const ForceModelConfig& high_cfg, int r,
                                          double rtol, int threads) {
  const int N = static_cast<int>(particles.size());
  if (N == 0) throw std::invalid_argument("empty ensemble");

  // Common stacked-output grid: segment boundaries clipped to the span, plus
  // both endpoints.
  std::vector<double> epochs{t0};
  for (double b : particles.front().thrust.boundaries())
    if (b > t0 && b < tf) epochs.push_back(b);
  if (tf > t0) epochs.push_back(tf);
  std::sort(epochs.begin(), epochs.end());
  const int ne = static_cast<int>(epochs.size());
  const int m = 6 * ne;

  EnsemblePropagation out;
  out.epochs = epochs;
  out.low = MatX::Zero(m, N);
  out.valid.assign(N, 1);

  parallel_for(N, threads, [&](int i) {
    try {
      const auto states = propagate_at(particles[i].x0, particles[i].thrust, epochs,
                                       low_cfg, rtol);
      for (int e = 0; e < ne; ++e) out.low.col(i).segment<6>(6 * e) = states[e].vec();
    } catch (const std::exception&) {
      out.valid[i] = 0;
    }
  });

  std::vector<int> valid_ids;
  for (int i = 0; i < N; ++i)
    if (out.valid[i]) valid_ids.push_back(i);
  if (valid_ids.empty()) throw std::runtime_error("all particles invalid");

  MatX X_valid(m, valid_ids.size());
  for (size_t c = 0; c < valid_ids.size(); ++c) X_valid.col(c) = out.low.col(valid_ids[c]);

  const int r_eff = std::min<int>(r, static_cast<int>(valid_ids.size()));
  out.interp = select_nodes(X_valid, r_eff, stacked_state_row_scale(ne, low_cfg.Re, low_cfg.mu));
  // Map node ids back to ensemble indexing.
  for (auto& id : out.interp.node_ids) id = valid_ids[id];

  // High-fidelity propagation of the selected nodes only.
  const int rr = out.interp.rank();
  out.interp.node_high.resize(m, rr);
  parallel_for(rr, threads, [&](int n) {
    const int i = out.interp.node_ids[n];
    const auto states =
        propagate_at(particles[i].x0, particles[i].thrust, epochs, high_cfg, rtol);
    for (int e = 0; e < ne; ++e)
      out.interp.node_high.col(n).segment<6>(6 * e) = states[e].vec();
  });

  out.corrected = MatX::Zero(m, N);
  parallel_for(N, threads, [&](int i) {
    if (!out.valid[i]) return;
    out.corrected.col(i) = out.interp.correct(out.low.col(i));
  });
  return out;
}

}  // namespace mtt
