#include "ssncp/jacobian.hpp"

namespace ssncp {

Mat BlockWeights::dense() const {
  Mat W(n, n);
  const Index nb = n - alpha;
  W.topLeftCorner(alpha, alpha).setConstant(aa);
  W.bottomRightCorner(nb, nb).setConstant(bb);
  W.topRightCorner(alpha, nb) = cross;
  W.bottomLeftCorner(nb, alpha) = cross.transpose();
  return W;
}

SpectralWeights weights_product(const SpectralWeights& a, const SpectralWeights& b) {
  if (a.size() != b.size()) throw StructuralError("weight structures differ");
  SpectralWeights out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].alpha != b[k].alpha || a[k].n != b[k].n) throw StructuralError("weight structures differ");
    out[k] = {a[k].alpha, a[k].n, a[k].aa * b[k].aa, a[k].bb * b[k].bb, a[k].cross.cwiseProduct(b[k].cross)};
  }
  return out;
}

SymBlockMatd apply_weights_dense(const EigDecompd& eig, const SpectralWeights& W, const SymBlockMatd& H) {
  if (W.size() != H.num_blocks() || eig.num_blocks() != H.num_blocks())
    throw StructuralError("weights do not match matrix blocks");
  std::vector<Mat> out;
  out.reserve(H.num_blocks());
  for (std::size_t k = 0; k < H.num_blocks(); ++k) {
    const Mat& Q = eig.Q[k];
    const Mat Ht = Q.transpose() * H.block(k) * Q;
    out.push_back(Q * W[k].dense().cwiseProduct(Ht) * Q.transpose());
  }
  return SymBlockMatd(std::move(out));
}

namespace {

// Q (W' o Q^T H Q) Q^T where W' vanishes outside the rows/columns of the
// leading `p` eigenvectors Qa: W'_aa = const da, W'_ab = Cab.
Mat split_term(const Mat& Qa, const Mat& Qb, double da, const Mat& Cab, const Mat& H) {
  const Mat U = Qa.transpose() * H;
  const Mat Haa = U * Qa;
  const Mat Hab = U * Qb;
  Mat M = (0.5 * da) * Haa * Qa.transpose();
  if (Qb.cols() > 0) M.noalias() += Cab.cwiseProduct(Hab) * Qb.transpose();
  const Mat T = Qa * M;
  return T + T.transpose();
}

Mat apply_block_lowrank(const Mat& Q, const BlockWeights& w, const Mat& H) {
  const Index n = w.n, p = w.alpha, nb = n - p;
  if (p == 0) {
    if (w.bb == 0.0) return Mat::Zero(n, n);
    return w.bb * H;
  }
  if (p == n) return w.aa * H;
  Mat R;
  if (2 * p <= n) {
    R = split_term(Q.leftCols(p), Q.rightCols(nb), w.aa - w.bb, (w.cross.array() - w.bb).matrix(), H);
    if (w.bb != 0.0) R += w.bb * H;
  } else {
    const Mat Cba = (w.cross.transpose().array() - w.aa).matrix();
    R = split_term(Q.rightCols(nb), Q.leftCols(p), w.bb - w.aa, Cba, H);
    if (w.aa != 0.0) R += w.aa * H;
  }
  return R;
}

}  // namespace

SymBlockMatd apply_weights_lowrank(const EigDecompd& eig, const SpectralWeights& W, const SymBlockMatd& H) {
  if (W.size() != H.num_blocks() || eig.num_blocks() != H.num_blocks())
    throw StructuralError("weights do not match matrix blocks");
  SymBlockMatd out(H.dims());
  for (std::size_t k = 0; k < H.num_blocks(); ++k) {
    if (H.block(k).rows() != W[k].n) throw StructuralError("weights do not match matrix blocks");
    out.block(k) = apply_block_lowrank(eig.Q[k], W[k], H.block(k));
  }
  out.symmetrize();
  return out;
}

SpectralWeights sigma_weights(const EigDecompd& eig) {
  SpectralWeights W(eig.num_blocks());
  for (std::size_t k = 0; k < eig.num_blocks(); ++k) {
    const auto& lam = eig.lambda[k];
    const Index n = lam.size(), p = eig.positive_count(k);
    BlockWeights& w = W[k];
    w.alpha = p;
    w.n = n;
    w.aa = 1.0;
    w.bb = 0.0;
    w.cross.resize(p, n - p);
    for (Index i = 0; i < p; ++i)
      for (Index j = p; j < n; ++j) w.cross(i, j - p) = lam[i] / (lam[i] - lam[j]);
  }
  return W;
}

JacElement build_jac_element(const Residual& r, const ProblemSpec& p, double sigma) {
  JacElement el;
  el.eig = r.eig;
  el.Sigma = sigma_weights(el.eig);
  el.sigma = sigma;
  el.has_h = p.has_h();
  el.Dq_mask = Vec::Zero(p.m());
  for (Index i = 0; i < p.m(); ++i) {
    const double v = r.box_arg[i];
    el.Dq_mask[i] = (v > p.lo[i] && v < p.hi[i]) ? 1.0 : 0.0;
  }
  if (!p.has_h()) {
    el.Dh_mask = SymBlockMatd::constant(p.dims(), 1.0);
  } else if (p.h.kind == HSpec::Kind::nonneg) {
    el.Dh_mask = r.h_arg.cwise([](double v) { return v > 0.0 ? 1.0 : 0.0; });
  } else {
    const double lo = p.h.lower, hi = p.h.upper;
    el.Dh_mask = r.h_arg.cwise([lo, hi](double v) { return (v > lo && v < hi) ? 1.0 : 0.0; });
  }
  return el;
}

JacElement build_jac_element(const Iterate& w, const ProblemSpec& p, double sigma) {
  return build_jac_element(eval_F(w, p, sigma), p, sigma);
}

SymBlockMatd apply_DK(const JacElement& el, const SymBlockMatd& H) {
  return apply_weights_dense(el.eig, el.Sigma, H);
}

SymBlockMatd apply_DK_lowrank(const JacElement& el, const SymBlockMatd& H) {
  return apply_weights_lowrank(el.eig, el.Sigma, H);
}

namespace {

template <typename AA, typename Cross, typename BB>
SpectralWeights map_weights(const SpectralWeights& S, AA aa, Cross cross, BB bb) {
  SpectralWeights W(S.size());
  for (std::size_t k = 0; k < S.size(); ++k) {
    W[k].alpha = S[k].alpha;
    W[k].n = S[k].n;
    W[k].aa = aa;
    W[k].bb = bb;
    W[k].cross = S[k].cross.unaryExpr(cross);
  }
  return W;
}

void require_tau(double tau) {
  if (!(tau > 0)) throw StructuralError("tau must be positive");
}

}  // namespace

SpectralWeights sigma_bar(const JacElement& el, double tau_x) {
  require_tau(tau_x);
  const double s = el.sigma, g = 1.0 + s * tau_x;
  return map_weights(
      el.Sigma, g / tau_x, [s, g](double v) { return s * g * v / (g - v); }, 0.0);
}

SpectralWeights dktau_inv_weights(const JacElement& el, double tau_x) {
  require_tau(tau_x);
  const double s = el.sigma, g = 1.0 + s * tau_x;
  return map_weights(
      el.Sigma, 1.0 / tau_x, [s, g](double v) { return s / (g - v); }, s / g);
}

SpectralWeights dktau_weights(const JacElement& el, double tau_x) {
  require_tau(tau_x);
  const double s = el.sigma, g = 1.0 + s * tau_x;
  return map_weights(
      el.Sigma, tau_x, [s, g](double v) { return (g - v) / s; }, 1.0 / s + tau_x);
}

SymBlockMatd apply_DKtau_inv(const JacElement& el, double tau_x, const SymBlockMatd& H) {
  return apply_weights_lowrank(el.eig, dktau_inv_weights(el, tau_x), H);
}

SymBlockMatd apply_DKtau(const JacElement& el, double tau_x, const SymBlockMatd& H) {
  return apply_weights_lowrank(el.eig, dktau_weights(el, tau_x), H);
}

Direction jac_matvec(const JacElement& el, const ProblemSpec& p, const TauVec& tau, const Direction& d) {
  const double s = el.sigma;
  SymBlockMatd dG = apply_At(p.A, d.y);
  if (el.has_h) dG += d.z;
  dG *= s;
  dG += d.x;
  const SymBlockMatd K = apply_DK_lowrank(el, dG);

  const Vec dQ = el.Dq_mask.cwiseProduct(d.u - s * d.y);

  Direction out;
  out.y = apply_A(p.A, K) - dQ + tau.tau_y * d.y;
  out.x = (d.x - K) * (1.0 / s);
  out.x.axpy(tau.tau_x, d.x);
  out.u = (d.u - dQ) / s + tau.tau_u * d.u;
  if (el.has_h) {
    const SymBlockMatd dH = hadamard(el.Dh_mask, d.q - s * d.z);
    out.z = K - dH;
    out.z.axpy(tau.tau_z, d.z);
    out.q = (d.q - dH) * (1.0 / s);
    out.q.axpy(tau.tau_q, d.q);
  } else {
    out.z = SymBlockMatd(p.dims());
    out.q = SymBlockMatd(p.dims());
  }
  return out;
}

}  // namespace ssncp
