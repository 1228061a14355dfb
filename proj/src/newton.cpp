#include "ssncp/newton.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

namespace ssncp {

namespace {

void pack(const SymBlockMatd& m, Vec& out, Index off) {
  for (const auto& b : m.blocks()) {
    out.segment(off, b.size()) = Eigen::Map<const Vec>(b.data(), b.size());
    off += b.size();
  }
}

SymBlockMatd unpack(const Vec& v, Index off, const std::vector<Index>& dims) {
  SymBlockMatd m(dims);
  for (std::size_t k = 0; k < dims.size(); ++k) {
    auto& b = m.block(k);
    b = Eigen::Map<const Mat>(v.data() + off, b.rows(), b.cols());
    off += b.size();
  }
  return m;
}

struct CgResult {
  Vec x;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Conjugate gradients on an SPD operator; checks the true residual before
// declaring convergence and restarts from it otherwise.
CgResult conjugate_gradient(const std::function<Vec(const Vec&)>& op, const Vec& rhs, double tol, int max_iter) {
  CgResult res;
  res.x = Vec::Zero(rhs.size());
  Vec r = rhs;
  double rr = r.squaredNorm();
  res.residual = std::sqrt(rr);
  if (res.residual <= tol) {
    res.converged = true;
    return res;
  }
  Vec best = res.x;
  double best_res = res.residual;
  int restarts = 0;
  while (res.iterations < max_iter) {
    Vec p = r;
    bool recurrence_done = false;
    while (res.iterations < max_iter) {
      const Vec Ap = op(p);
      const double pAp = p.dot(Ap);
      if (!(pAp > 0) || !std::isfinite(pAp)) break;
      const double a = rr / pAp;
      res.x += a * p;
      r -= a * Ap;
      ++res.iterations;
      const double rr_new = r.squaredNorm();
      if (std::sqrt(rr_new) <= tol) {
        recurrence_done = true;
        break;
      }
      p = r + (rr_new / rr) * p;
      rr = rr_new;
    }
    r = rhs - op(res.x);
    rr = r.squaredNorm();
    res.residual = std::sqrt(rr);
    if (res.residual < best_res) {
      best_res = res.residual;
      best = res.x;
    }
    if (res.residual <= tol) {
      res.converged = true;
      return res;
    }
    if (!recurrence_done && ++restarts > 3) break;
    if (recurrence_done && ++restarts > 20) break;
  }
  res.x = best;
  res.residual = best_res;
  return res;
}

// Orthonormal svec coordinates of the packed (dy, full dz) vector.
struct SvecMap {
  Index m;
  std::vector<Index> dims;
  Index full_size() const {
    Index s = m;
    for (Index d : dims) s += d * d;
    return s;
  }
  Index svec_size() const {
    Index s = m;
    for (Index d : dims) s += d * (d + 1) / 2;
    return s;
  }
  Vec to_svec(const Vec& f) const {
    Vec v(svec_size());
    v.head(m) = f.head(m);
    Index fo = m, so = m;
    for (Index d : dims) {
      for (Index j = 0; j < d; ++j)
        for (Index i = j; i < d; ++i) v[so++] = i == j ? f[fo + j * d + i] : std::sqrt(2.0) * f[fo + j * d + i];
      fo += d * d;
    }
    return v;
  }
  Vec to_full(const Vec& v) const {
    Vec f = Vec::Zero(full_size());
    f.head(m) = v.head(m);
    Index fo = m, so = m;
    for (Index d : dims) {
      for (Index j = 0; j < d; ++j)
        for (Index i = j; i < d; ++i) {
          const double x = v[so++];
          if (i == j) {
            f[fo + j * d + i] = x;
          } else {
            f[fo + j * d + i] = f[fo + i * d + j] = x / std::sqrt(2.0);
          }
        }
      fo += d * d;
    }
    return f;
  }
};

// Assembles the operator in svec coordinates and solves with LDL^T plus one
// refinement step.
Vec dense_solve(const std::function<Vec(const Vec&)>& op, const Vec& rhs, const SvecMap& map) {
  const Index ns = map.svec_size();
  Mat M(ns, ns);
  Vec e = Vec::Zero(ns);
  for (Index c = 0; c < ns; ++c) {
    e[c] = 1.0;
    M.col(c) = map.to_svec(op(map.to_full(e)));
    e[c] = 0.0;
  }
  M = 0.5 * (M + M.transpose()).eval();
  // A failed factorization yields a non-finite solution, which the caller rejects by residual.
  Eigen::LDLT<Mat> ldlt(M);
  const Vec b = map.to_svec(rhs);
  Vec x = ldlt.solve(b);
  x += ldlt.solve(b - M * x);
  return map.to_full(x);
}

Vec diag_bar(const Vec& mask, double sigma, double tau) {
  return mask * (sigma + 1.0 / tau);
}

}  // namespace

InnerSolve solve_newton_system(const JacElement& el, const ProblemSpec& p, const TauVec& tau, const Iterate& F,
                               double inner_tol, int inner_max_iter, bool allow_fast_path, Index direct_limit) {
  const double s = el.sigma;
  const Index m = p.m();
  const auto dims = p.dims();
  const Index n = p.c.dim();
  if (inner_max_iter <= 0) inner_max_iter = static_cast<int>(10 * (m + n));
  const double tx = tau.tau_x;

  const SpectralWeights bar = sigma_bar(el, tx);
  const SpectralWeights inv = dktau_inv_weights(el, tx);
  const SpectralWeights dk_inv = weights_product(el.Sigma, inv);

  InnerSolve out;
  out.fast_path = allow_fast_path && p.is_standard_sdp();
  const bool with_z = el.has_h && !out.fast_path;

  // Right-hand side of the reduced system.
  const SymBlockMatd DkFx = apply_weights_lowrank(el.eig, dk_inv, F.x);
  Vec Ry = -F.y + apply_A(p.A, DkFx);
  const Vec q_inv = (1.0 + s * tau.tau_u - el.Dq_mask.array()).inverse().matrix() * s;
  if (!out.fast_path) Ry -= el.Dq_mask.cwiseProduct(q_inv.cwiseProduct(F.u));
  const Vec Qbar = out.fast_path ? Vec::Zero(m) : diag_bar(el.Dq_mask, s, tau.tau_u);

  SymBlockMatd h_inv, Hbar;
  const Index total = m + (with_z ? p.c.storage_size() : 0);
  Vec rhs(total);
  rhs.head(m) = Ry;
  if (with_z) {
    const double tq = tau.tau_q;
    h_inv = el.Dh_mask.cwise([s, tq](double d) { return s / (1.0 + s * tq - d); });
    Hbar = el.Dh_mask.cwise([s, tq](double d) { return d * (s + 1.0 / tq); });
    SymBlockMatd Rz = DkFx - F.z;
    Rz -= hadamard(el.Dh_mask, hadamard(h_inv, F.q));
    pack(Rz, rhs, m);
  }

  auto op = [&](const Vec& v) -> Vec {
    const Vec dy = v.head(m);
    SymBlockMatd T = apply_At(p.A, dy);
    SymBlockMatd dz;
    if (with_z) {
      dz = unpack(v, m, dims);
      T += dz;
    }
    const SymBlockMatd K = apply_weights_lowrank(el.eig, bar, T);
    Vec r(v.size());
    r.head(m) = tau.tau_y * dy + Qbar.cwiseProduct(dy) + apply_A(p.A, K);
    if (with_z) {
      SymBlockMatd rz = K + hadamard(Hbar, dz);
      rz.axpy(tau.tau_z, dz);
      pack(rz, r, m);
    }
    return r;
  };

  CgResult cg = conjugate_gradient(op, rhs, inner_tol, inner_max_iter);
  out.iterations = cg.iterations;
  const SvecMap map{m, with_z ? dims : std::vector<Index>{}};
  if (!cg.converged && map.svec_size() <= direct_limit) {
    Vec x = dense_solve(op, rhs, map);
    const double r = (rhs - op(x)).norm();
    if (r < cg.residual) {
      cg.x = std::move(x);
      cg.residual = r;
      cg.converged = r <= inner_tol;
      out.direct = true;
    }
  }
  out.converged = cg.converged;
  out.residual_norm = cg.residual;

  Direction& d = out.d;
  d.y = cg.x.head(m);
  SymBlockMatd T = apply_At(p.A, d.y);
  if (with_z) {
    d.z = unpack(cg.x, m, dims);
    T += d.z;
  } else {
    d.z = SymBlockMatd(dims);
  }
  d.x = apply_weights_lowrank(el.eig, dk_inv, T) - apply_weights_lowrank(el.eig, inv, F.x);
  d.u = -q_inv.cwiseProduct(el.Dq_mask.cwiseProduct(d.y) + F.u);
  if (with_z) {
    d.q = -hadamard(h_inv, hadamard(el.Dh_mask, d.z) + F.q);
  } else {
    d.q = SymBlockMatd(dims);
  }
  return out;
}

CorrectionQuantities correction_quantities(const Iterate& w, const ProblemSpec& p, double sigma) {
  CorrectionQuantities c;
  const auto dims = p.dims();
  c.z_hat = SymBlockMatd(dims);
  if (p.h.kind == HSpec::Kind::box) {
    const double lo = p.h.lower, hi = p.h.upper;
    c.q_hat = w.q.cwise([lo, hi](double v) { return std::abs(v - lo) <= std::abs(v - hi) ? lo : hi; });
  } else {
    c.q_hat = SymBlockMatd(dims);
  }
  c.upsilon = w.q - c.q_hat - sigma * (w.z + c.z_hat);

  const Index m = p.m();
  c.u_hat = Vec::Zero(m);
  c.y_hat = Vec::Zero(m);
  c.u_active = Vec::Zero(m);
  for (Index i = 0; i < m; ++i) {
    const double lo = p.lo[i], hi = p.hi[i], u = w.u[i];
    if (lo == hi) {
      c.u_hat[i] = lo;
      continue;
    }
    const bool flo = std::isfinite(lo), fhi = std::isfinite(hi);
    if (!flo && !fhi) {
      c.u_hat[i] = u;
      continue;
    }
    if (flo && (!fhi || std::abs(u - lo) <= std::abs(u - hi)))
      c.u_hat[i] = lo;
    else
      c.u_hat[i] = hi;
    c.u_active[i] = 1.0;
  }
  c.vartheta = w.u - c.u_hat - sigma * (w.y + c.y_hat);
  return c;
}

Iterate correction_apply(const Iterate& wbar, const ProblemSpec& p, double sigma, double theta, double l, double rho,
                         CorrectionStats* stats) {
  if (theta < 0 || l < 0 || rho < 0) throw StructuralError("correction thresholds must be nonnegative");
  Iterate w = wbar;
  CorrectionStats st;
  if (theta > 0) {
    const EigDecompd eig = sym_eig(spectral_argument(wbar, p, sigma));
    for (std::size_t k = 0; k < eig.num_blocks(); ++k) {
      const Mat& Q = eig.Q[k];
      const Vec& lam = eig.lambda[k];
      for (Index i = 0; i < lam.size(); ++i) {
        if (std::abs(lam[i]) < theta / 2) {
          w.x.block(k).noalias() -= lam[i] * Q.col(i) * Q.col(i).transpose();
          ++st.eigen;
        }
      }
    }
    w.x.symmetrize();
  }
  if (l > 0 || rho > 0) {
    const CorrectionQuantities c = correction_quantities(wbar, p, sigma);
    if (p.has_h() && l > 0) {
      for (std::size_t k = 0; k < w.q.num_blocks(); ++k) {
        const Mat& z = wbar.z.block(k);
        const Mat& q = wbar.q.block(k);
        Mat& qo = w.q.block(k);
        for (Index j = 0; j < z.cols(); ++j)
          for (Index i = 0; i < z.rows(); ++i) {
            if (std::abs(z(i, j) - c.z_hat.block(k)(i, j)) < l / (2 * sigma) &&
                std::abs(q(i, j) - c.q_hat.block(k)(i, j)) < l / 2) {
              qo(i, j) -= c.upsilon.block(k)(i, j);
              ++st.h_entries;
            }
          }
      }
    }
    if (rho > 0) {
      for (Index i = 0; i < p.m(); ++i) {
        if (c.u_active[i] == 0.0) continue;
        if (std::abs(wbar.y[i] - c.y_hat[i]) <= rho / (2 * sigma) && std::abs(wbar.u[i] - c.u_hat[i]) < rho / 2) {
          w.u[i] -= c.vartheta[i];
          ++st.q_entries;
        }
      }
    }
  }
  if (stats) *stats = st;
  return w;
}

void SolverConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw StructuralError(std::string("invalid solver parameter: ") + what);
  };
  need(sigma > 0, "sigma > 0");
  need(kappa > 0, "kappa > 0");
  need(gamma > 1, "gamma > 1");
  need(i_max >= 0, "i_max >= 0");
  need(nu > 0 && nu < 1, "nu in (0,1)");
  need(beta > 1.0 / 3.0 && beta <= 1, "beta in (1/3,1]");
  need(kappa1 >= 1, "kappa1 >= 1");
  need(zeta_window >= 1, "zeta_window >= 1");
  need(varsigma_scale >= 0, "varsigma_scale >= 0");
  need(C_eta_scale > 0 && c_eta > 0 && q > 1, "eta rule constants");
  need(correction.theta >= 0 && correction.l >= 0 && correction.rho >= 0, "correction thresholds >= 0");
  need(tol > 0, "tol > 0");
  need(max_iter >= 0, "max_iter >= 0");
  need(max_time > 0, "max_time > 0");
}

std::string to_string(Branch b) { return b == Branch::decrease1 ? "decrease1" : "decrease2"; }

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::max_time: return "max_time";
    case SolveStatus::numeric_failure: return "numeric_failure";
  }
  return "unknown";
}

SolveState SolveState::start(const ProblemSpec& p, Iterate w0, const SolverConfig& cfg) {
  SolveState st;
  st.w = std::move(w0);
  st.Fw = eval_F(st.w, p, cfg.sigma);
  st.F0 = st.Fw.norm;
  st.history.push_back(st.F0);
  st.c_varsigma = cfg.varsigma_scale * st.F0;
  st.C_eta = cfg.C_eta_scale * st.F0;
  st.beta = cfg.beta;
  st.c_eta = cfg.c_eta;
  st.q = cfg.q;
  st.inner_cap = cfg.inner_max_iter > 0 ? cfg.inner_max_iter : static_cast<int>(10 * (p.m() + p.c.dim()));
  return st;
}

double SolveState::eta_bound() const {
  const double a = k == 0 ? C_eta : C_eta * std::pow(static_cast<double>(k), -beta);
  return std::min(a, c_eta * std::pow(Fw.norm, q));
}

double SolveState::varsigma() const {
  return k == 0 ? c_varsigma : c_varsigma * std::pow(static_cast<double>(k), -5.0 / 3.0);
}

SolveState step(SolveState st, const ProblemSpec& p, const SolverConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const double s = cfg.sigma;
  const double Fk = st.Fw.norm;
  if (!(Fk > 0)) throw StructuralError("step requires a nonzero residual");

  const double eta_tol = st.eta_bound();
  const double window_max = *std::max_element(st.history.begin(), st.history.end());
  const double varsigma = st.varsigma();
  const bool correct = cfg.correction.enabled && Fk < cfg.correction.activation_threshold;

  const JacElement el = build_jac_element(st.Fw, p, s);
  TraceEntry te;
  te.k = st.k;
  te.res_norm = Fk;
  te.eta_bound = eta_tol;

  bool accepted = false;
  Iterate next;
  Residual Fnext;
  for (int i = 0; i <= cfg.i_max && !accepted; ++i) {
    const double tau = cfg.kappa * std::pow(cfg.gamma, i) * Fk;
    InnerSolve sol = solve_newton_system(el, p, TauVec::uniform(tau), st.Fw.F, eta_tol, st.inner_cap,
                                         cfg.use_fast_path, cfg.direct_limit);
    ++te.trials;
    te.inner_iters += sol.iterations;
    if (!sol.converged) continue;
    Iterate wbar = st.w + sol.d;
    Iterate wt;
    CorrectionStats cs;
    if (correct) {
      wt = correction_apply(wbar, p, s, cfg.correction.theta, cfg.correction.l, cfg.correction.rho, &cs);
    } else {
      wt = std::move(wbar);
    }
    Residual Ft;
    try {
      Ft = eval_F(wt, p, s);
    } catch (const NumericError&) {
      continue;
    }
    if (Ft.norm <= cfg.nu * window_max + varsigma) {
      accepted = true;
      te.tau = tau;
      te.eta_norm = sol.residual_norm;
      te.branch = Branch::decrease1;
      te.corrected = correct;
      if (correct) st.correction_log.push_back(cs);
      next = std::move(wt);
      Fnext = std::move(Ft);
    }
  }
  if (!accepted) {
    const double tau = cfg.kappa1 * std::pow(static_cast<double>(std::max(st.k, 1)), cfg.beta);
    InnerSolve sol = solve_newton_system(el, p, TauVec::uniform(tau), st.Fw.F, eta_tol, st.inner_cap,
                                         cfg.use_fast_path, cfg.direct_limit);
    ++te.trials;
    te.inner_iters += sol.iterations;
    if (!sol.converged) throw NumericError("inner solver failed on the fallback branch");
    next = st.w + sol.d;
    Fnext = eval_F(next, p, s);
    te.tau = tau;
    te.eta_norm = sol.residual_norm;
    te.branch = Branch::decrease2;
  }

  te.step_norm = (next - st.w).norm();
  te.res_next = Fnext.norm;
  st.w = std::move(next);
  st.Fw = std::move(Fnext);
  if (te.branch == Branch::decrease1)
    ++st.decrease1;
  else
    ++st.decrease2;
  st.history.push_back(st.Fw.norm);
  while (static_cast<int>(st.history.size()) > cfg.zeta_window) st.history.pop_front();
  st.elapsed += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  te.time = st.elapsed;
  st.trace.push_back(te);
  ++st.k;
  return st;
}

namespace {

ProblemSpec scaled_problem(const ProblemSpec& p, double sb, double sc) {
  ProblemSpec q = p;
  q.c *= 1.0 / sc;
  q.lo = p.lo / sb;
  q.hi = p.hi / sb;
  if (q.h.kind == HSpec::Kind::box) {
    q.h.lower /= sb;
    q.h.upper /= sb;
  }
  return q;
}

Iterate unscale(Iterate w, double sb, double sc) {
  w.y *= sc;
  w.z *= sc;
  w.x *= sb;
  w.u *= sb;
  w.q *= sb;
  return w;
}

Iterate rescale(Iterate w, double sb, double sc) { return unscale(std::move(w), 1.0 / sb, 1.0 / sc); }

}  // namespace

SolveReport solve(const ProblemSpec& p, std::optional<Iterate> w0, const SolverConfig& cfg) {
  p.validate();
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

  double sb = 1.0, sc = 1.0;
  if (cfg.rescale) {
    const Vec b = p.reference_rhs();
    sb = std::max(1.0, b.norm());
    sc = std::max(1.0, p.c.norm());
  }
  const ProblemSpec ps = cfg.rescale ? scaled_problem(p, sb, sc) : p;
  Iterate start = w0 ? rescale(*w0, sb, sc) : Iterate::initial(ps);
  if (!ps.has_h()) {
    start.z.set_zero();
    start.q.set_zero();
  }

  SolveReport rep;
  rep.sigma = cfg.sigma;
  rep.scale_b = sb;
  rep.scale_c = sc;

  SolveState st;
  try {
    st = SolveState::start(ps, std::move(start), cfg);
  } catch (const NumericError& e) {
    rep.status = SolveStatus::numeric_failure;
    rep.message = e.what();
    rep.w = w0 ? *w0 : Iterate::initial(p);
    rep.time = elapsed();
    return rep;
  }
  rep.initial_residual = st.F0;

  KktReport kkt;
  while (true) {
    if (st.Fw.norm == 0.0) {
      rep.status = SolveStatus::optimal;
      kkt = compute_kkt(unscale(st.w, sb, sc), p, cfg.sigma);
      break;
    }
    kkt = compute_kkt(unscale(st.w, sb, sc), p, cfg.sigma);
    if (kkt.primary(p.has_h()) <= cfg.tol) {
      rep.status = SolveStatus::optimal;
      break;
    }
    if (st.k >= cfg.max_iter) {
      rep.status = SolveStatus::max_iter;
      break;
    }
    if (elapsed() >= cfg.max_time) {
      rep.status = SolveStatus::max_time;
      break;
    }
    try {
      st = step(std::move(st), ps, cfg);
      st.trace.back().time = elapsed();
    } catch (const NumericError& e) {
      rep.status = SolveStatus::numeric_failure;
      rep.message = e.what();
      break;
    }
  }

  rep.w = unscale(st.w, sb, sc);
  rep.x = rep.w.x;
  rep.y = rep.w.y;
  rep.z = rep.w.z;
  rep.s = recover_s(rep.w, p);
  rep.kkt = kkt;
  rep.trace = std::move(st.trace);
  rep.iterations = st.k;
  rep.decrease1 = st.decrease1;
  rep.decrease2 = st.decrease2;
  rep.corrections = static_cast<int>(st.correction_log.size());
  for (const auto& t : rep.trace) rep.inner_iters_total += t.inner_iters;
  rep.residual_norm = st.Fw.norm;
  rep.time = elapsed();
  return rep;
}

}  // namespace ssncp
