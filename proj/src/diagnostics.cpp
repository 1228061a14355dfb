#include "ssncp/diagnostics.hpp"

#include <cmath>
#include <limits>

namespace ssncp {

std::map<std::string, double> KktReport::flat() const {
  return {{"eta_p", eta_p},   {"eta_d", eta_d},   {"eta_K", eta_K},         {"eta_Kstar", eta_Kstar},
          {"eta_C1", eta_C1}, {"eta_P", eta_P},   {"eta_C2", eta_C2},       {"eta_g", eta_g},
          {"eta_g_abs", eta_g_abs}, {"eta1", eta1}, {"eta2", eta2},         {"obj_p", obj_p},
          {"obj_d", obj_d},   {"dual_infinite", dual_infinite ? 1.0 : 0.0}};
}

SymBlockMatd recover_s(const Iterate& w, const ProblemSpec& p) {
  SymBlockMatd arg = p.c - apply_At(p.A, w.y);
  if (p.has_h()) arg -= w.z;
  arg -= w.x;
  return project_psd(arg).first;
}

namespace {

// sup over v in [lo, hi] of t * v, accumulated with an infinity flag.
void add_support(double t, double lo, double hi, double& acc, bool& infinite) {
  if (t > 0) {
    if (std::isfinite(hi))
      acc += t * hi;
    else
      infinite = true;
  } else if (t < 0) {
    if (std::isfinite(lo))
      acc += t * lo;
    else
      infinite = true;
  }
}

}  // namespace

KktReport compute_kkt(const Iterate& w, const ProblemSpec& p, double /*sigma*/) {
  KktReport r;
  const SymBlockMatd& x = w.x;
  const SymBlockMatd z = p.has_h() ? w.z : SymBlockMatd(p.dims());
  const SymBlockMatd s = recover_s(w, p);
  const double nx = x.norm(), ns = s.norm(), nz = z.norm();

  const Vec Ax = apply_A(p.A, x);
  r.eta_p = (Ax - prox_box(Ax, p.lo, p.hi)).norm() / (1.0 + p.reference_rhs().norm());

  SymBlockMatd dres = apply_At(p.A, w.y) + z + s - p.c;
  r.eta_d = dres.norm() / (1.0 + p.c.norm());

  r.eta_K = (x - project_psd(x).first).norm() / (1.0 + nx);
  r.eta_Kstar = (s - project_psd(s).first).norm() / (1.0 + ns);
  r.eta_C1 = std::abs(inner(x, s)) / (1.0 + nx + ns);

  double h_conj = 0.0;
  bool h_inf = false;
  if (p.has_h()) {
    r.eta_P = (x - prox_h(x, 1.0, p.h)).norm() / (1.0 + nx);
    for (std::size_t k = 0; k < z.num_blocks(); ++k) {
      const Mat& zb = z.block(k);
      for (Index j = 0; j < zb.cols(); ++j)
        for (Index i = 0; i < zb.rows(); ++i) {
          if (p.h.kind == HSpec::Kind::nonneg)
            add_support(-zb(i, j), 0.0, std::numeric_limits<double>::infinity(), h_conj, h_inf);
          else
            add_support(-zb(i, j), p.h.lower, p.h.upper, h_conj, h_inf);
        }
    }
    r.eta_C2 = std::abs(inner(x, z) + h_conj) / (1.0 + nx + nz);
  }

  double q_supp = 0.0;
  bool q_inf = false;
  for (Index i = 0; i < p.m(); ++i) add_support(-w.y[i], p.lo[i], p.hi[i], q_supp, q_inf);

  r.obj_p = inner(p.c, x);
  r.obj_d = -(h_conj + q_supp);
  r.dual_infinite = h_inf || q_inf;
  const double gap = std::abs(r.obj_p - r.obj_d);
  r.eta_g = gap / std::abs(1.0 + r.obj_p + r.obj_d);
  if (!std::isfinite(r.eta_g)) r.eta_g = gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  r.eta_g_abs = gap / (1.0 + std::abs(r.obj_p) + std::abs(r.obj_d));

  r.eta1 = std::max({r.eta_p, r.eta_d, r.eta_K, r.eta_Kstar, r.eta_C1});
  r.eta2 = std::max({r.eta1, r.eta_P, r.eta_C2});
  return r;
}

namespace {

Index count_rank(const EigDecompd& eig, double lmax, double rank_tol) {
  Index r = 0;
  if (!(lmax > 0)) return 0;
  for (const auto& lam : eig.lambda)
    for (Index i = 0; i < lam.size(); ++i)
      if (lam[i] > rank_tol * lmax) ++r;
  return r;
}

double max_eig(const EigDecompd& eig) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& lam : eig.lambda)
    if (lam.size() > 0) m = std::max(m, lam[0]);
  return m;
}

}  // namespace

ScResult check_sc(const SymBlockMatd& x, const SymBlockMatd& s, const SymBlockMatd* z, double rank_tol) {
  x.require_conform(s);
  ScResult r;
  r.n = x.dim();
  const EigDecompd ex = sym_eig(x), es = sym_eig(s);
  r.rank_x = count_rank(ex, max_eig(ex), rank_tol);
  r.rank_s = count_rank(es, max_eig(es), rank_tol);
  r.inner_xs = inner(x, s);
  const double scale = std::max(1.0, x.norm() * s.norm());
  r.holds = (r.rank_x + r.rank_s == r.n) && std::abs(r.inner_xs) <= rank_tol * scale;
  if (z) {
    x.require_conform(*z);
    r.inner_xz = inner(x, *z);
    const SymBlockMatd xz = x + *z;
    double big = 0.0;
    r.min_x_plus_z = std::numeric_limits<double>::infinity();
    for (const auto& b : xz.blocks()) {
      big = std::max(big, b.cwiseAbs().maxCoeff());
      r.min_x_plus_z = std::min(r.min_x_plus_z, b.minCoeff());
    }
    r.holds = r.holds && std::abs(r.inner_xz) <= rank_tol * std::max(1.0, x.norm() * z->norm()) &&
              r.min_x_plus_z > rank_tol * std::max(1.0, big);
  }
  return r;
}

std::vector<ErrorBoundSample> error_bound_probe(const std::vector<std::pair<double, double>>& pairs) {
  std::vector<ErrorBoundSample> out;
  out.reserve(pairs.size());
  for (const auto& [res, dist] : pairs) {
    double ratio = 0.0;
    if (res > 0)
      ratio = dist / res;
    else if (dist > 0)
      ratio = std::numeric_limits<double>::infinity();
    out.push_back({res, dist, ratio});
  }
  return out;
}

std::vector<ErrorBoundSample> error_bound_probe(const std::vector<Iterate>& trace, const Iterate& w_star,
                                                const ProblemSpec& p, double sigma) {
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(trace.size());
  for (const auto& w : trace) pairs.emplace_back(eval_F(w, p, sigma).norm, (w - w_star).norm());
  return error_bound_probe(pairs);
}

std::optional<double> superlinear_ratio(const std::vector<double>& residuals, std::size_t tail) {
  // Longest strictly decreasing positive suffix.
  std::size_t start = residuals.size();
  while (start > 0) {
    const std::size_t i = start - 1;
    if (!(residuals[i] > 0)) break;
    if (start < residuals.size() && !(residuals[i] > residuals[start])) break;
    start = i;
  }
  std::size_t len = residuals.size() - start;
  if (tail > 0 && len > tail) {
    start = residuals.size() - tail;
    len = tail;
  }
  if (len < 4) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double npts = static_cast<double>(len - 1);
  for (std::size_t i = start; i + 1 < residuals.size(); ++i) {
    const double a = std::log(residuals[i]), b = std::log(residuals[i + 1]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  const double den = npts * sxx - sx * sx;
  if (den == 0.0) return std::nullopt;
  return (npts * sxy - sx * sy) / den;
}

}  // namespace ssncp
