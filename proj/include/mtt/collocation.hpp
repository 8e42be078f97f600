#pragma once

#include <vector>

#include "mtt/dynamics.hpp"
#include "mtt/types.hpp"

namespace mtt {

/// Bifidelity stochastic-collocation interpolant. Nodes are low-fidelity
/// output columns picked greedily by residual distance (one pivot of the
/// pivoted Cholesky factorization of the scaled Gramian per node); synthesis
/// applies the same interpolation weights to the high-fidelity node outputs.
struct MFInterpolant {
  std::vector<int> node_ids;   // selected sample indices, pivot order
  MatX L;                      // r x r lower-triangular node-Gramian factor
  MatX node_low;               // m x r raw low-fidelity node columns
  MatX node_high;              // m x r high-fidelity node columns (may be empty)
  VecX row_scale;              // inner-product metric weights per row
  std::vector<double> pivots;  // squared residual distance at each selection
  bool rank_deficient = false;

  int rank() const { return static_cast<int>(node_ids.size()); }
  bool has_high() const { return node_high.size() > 0; }

  /// Interpolation coefficients for a low-fidelity query column: solves the
  /// node Gram system (L L^T) c = g by two triangular solves.
  VecX coefficients(const VecX& x_low) const;

  /// sum_n c_n f^H(gamma_n); requires high outputs.
  VecX synthesize(const VecX& c) const;

  VecX correct(const VecX& x_low) const { return synthesize(coefficients(x_low)); }
};

/// Greedy max-residual node selection from the columns of X_low (m x N).
/// row_scale weights the rows in all inner products (empty = unit metric).
/// Selection stops early, with rank_deficient set, when the next pivot drops
/// below 1e-12 times the first.
MFInterpolant select_nodes(const MatX& X_low, int r, const VecX& row_scale = VecX());

/// Canonical-unit metric for stacked 6-dim states: position rows weighted
/// 1/Re, velocity rows sqrt(Re/mu).
VecX stacked_state_row_scale(int n_epochs, double Re = kEarthRadius,
                             double mu = kMuEarth);

/// Multi-fidelity propagation of a particle ensemble over [t0, tf]. Each
/// column stacks the state at every thrust-segment boundary plus tf.
struct EnsemblePropagation {
  std::vector<double> epochs;  // stacked output epochs
  MatX low;                    // m x N low-fidelity stacks
  MatX corrected;              // m x N surrogate stacks
  MFInterpolant interp;
  std::vector<char> valid;     // per-particle; failures are flagged, not fatal

  Vec6 state_at_end(int particle) const {
    return corrected.col(particle).tail<6>();
  }
};

/// Propagates every particle with the low-fidelity model, selects r nodes,
/// propagates only those with the high-fidelity model, and replaces every
/// particle's stacked boundary states by surrogates. Particles whose
/// propagation fails are marked invalid (callers zero their weights).
/// All particles must share the same segment-boundary epochs.
EnsemblePropagation mf_propagate_ensemble(const std::vector<Particle>& particles,
                                          double t0, double tf,
                                          const ForceModelConfig& low_cfg,
                                          const ForceModelConfig& high_cfg, int r,
                                          double rtol = 1e-9, int threads = 1);

}  // namespace mtt
