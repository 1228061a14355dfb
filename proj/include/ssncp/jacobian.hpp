#pragma once

// Generalized Jacobian elements of F and the operator applications used by
// the Newton solve.

#include "ssncp/saddle.hpp"

namespace ssncp {

/// Weight matrix of one block in the eigenbasis, ordered (alpha, alpha-bar):
///   [[aa * E, cross], [cross^T, bb * E]]
/// where alpha = {i : lambda_i > 0} has `alpha` leading indices.
struct BlockWeights {
  Index alpha = 0;
  Index n = 0;
  double aa = 0.0;
  double bb = 0.0;
  Mat cross;  // alpha x (n - alpha)

  Mat dense() const;
};

using SpectralWeights = std::vector<BlockWeights>;

/// Entrywise product of two weight structures on the same spectrum.
SpectralWeights weights_product(const SpectralWeights& a, const SpectralWeights& b);

/// Q (W o (Q^T H Q)) Q^T with fully materialized W.
SymBlockMatd apply_weights_dense(const EigDecompd& eig, const SpectralWeights& W, const SymBlockMatd& H);
/// Same value via the rank split on alpha (or its complement when |alpha| > n/2).
SymBlockMatd apply_weights_lowrank(const EigDecompd& eig, const SpectralWeights& W, const SymBlockMatd& H);

struct JacElement {
  EigDecompd eig;
  SpectralWeights Sigma;  // v_ij = lambda_i / (lambda_i - lambda_j) on alpha x alpha-bar
  Vec Dq_mask;
  SymBlockMatd Dh_mask;   // all ones when h is absent
  double sigma = 1.0;
  bool has_h = false;
};

struct TauVec {
  double tau_y = 0.0, tau_z = 0.0, tau_x = 0.0, tau_u = 0.0, tau_q = 0.0;
  static TauVec uniform(double t) { return {t, t, t, t, t}; }
};

/// Builds from a residual already evaluated at w (reuses its eigendecomposition).
JacElement build_jac_element(const Residual& r, const ProblemSpec& p, double sigma);
JacElement build_jac_element(const Iterate& w, const ProblemSpec& p, double sigma);

SpectralWeights sigma_weights(const EigDecompd& eig);

SymBlockMatd apply_DK(const JacElement& el, const SymBlockMatd& H);
SymBlockMatd apply_DK_lowrank(const JacElement& el, const SymBlockMatd& H);

/// Sigma-bar: weights of D-bar_K = sigma D_K + D_K (D_K^tau)^{-1} D_K.
SpectralWeights sigma_bar(const JacElement& el, double tau_x);
/// Weights of (D_K^tau)^{-1} and of D_K^tau = (1/sigma + tau) I - D_K / sigma.
SpectralWeights dktau_inv_weights(const JacElement& el, double tau_x);
SpectralWeights dktau_weights(const JacElement& el, double tau_x);

SymBlockMatd apply_DKtau_inv(const JacElement& el, double tau_x, const SymBlockMatd& H);
SymBlockMatd apply_DKtau(const JacElement& el, double tau_x, const SymBlockMatd& H);

/// (J + tau I) d.
Direction jac_matvec(const JacElement& el, const ProblemSpec& p, const TauVec& tau, const Direction& d);

}  // namespace ssncp
