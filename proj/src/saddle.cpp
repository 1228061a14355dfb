#include "ssncp/saddle.hpp"

#include <cmath>
#include <limits>

namespace ssncp {

std::string HSpec::name() const {
  switch (kind) {
    case Kind::absent: return "absent";
    case Kind::nonneg: return "nonneg";
    case Kind::box: return "box";
  }
  return "unknown";
}

ProblemSpec ProblemSpec::equality(SymBlockMatd c, ConstraintMapd A, const Vec& b, HSpec h) {
  ProblemSpec p{std::move(c), std::move(A), b, b, h};
  p.validate();
  return p;
}

bool ProblemSpec::all_singleton() const {
  for (Index i = 0; i < lo.size(); ++i)
    if (lo[i] != hi[i]) return false;
  return true;
}

Vec ProblemSpec::reference_rhs() const {
  Vec b(m());
  for (Index i = 0; i < m(); ++i) {
    if (lo[i] == hi[i]) {
      b[i] = lo[i];
    } else {
      double v = 0.0;
      if (std::isfinite(lo[i])) v = std::abs(lo[i]);
      if (std::isfinite(hi[i])) v = std::max(v, std::abs(hi[i]));
      b[i] = v;
    }
  }
  return b;
}

void ProblemSpec::validate() const {
  if (c.num_blocks() == 0) throw StructuralError("problem has no matrix blocks");
  if (!A.conforms(c)) throw StructuralError("cost and constraint block structures differ");
  if (lo.size() != A.m() || hi.size() != A.m())
    throw StructuralError("bound vectors must have one entry per constraint");
  for (Index i = 0; i < lo.size(); ++i) {
    if (std::isnan(lo[i]) || std::isnan(hi[i])) throw StructuralError("NaN constraint bound");
    if (lo[i] > hi[i]) throw StructuralError("constraint bound lo > hi at row " + std::to_string(i));
    if (lo[i] == hi[i] && !std::isfinite(lo[i]))
      throw StructuralError("equality constraint with infinite right-hand side");
  }
  if (!c.all_finite()) throw StructuralError("non-finite cost entry");
  if (h.kind == HSpec::Kind::box) {
    if (!(h.lower <= h.upper)) throw StructuralError("h box requires lower <= upper");
  }
}

Iterate Iterate::zeros(const ProblemSpec& p) {
  const auto d = p.dims();
  return {Vec::Zero(p.m()), SymBlockMatd(d), SymBlockMatd(d), Vec::Zero(p.m()), SymBlockMatd(d)};
}

Iterate Iterate::initial(const ProblemSpec& p) {
  Iterate w = zeros(p);
  w.u = prox_box(Vec::Zero(p.m()), p.lo, p.hi);
  return w;
}

Iterate& Iterate::operator+=(const Iterate& o) {
  y += o.y;
  z += o.z;
  x += o.x;
  u += o.u;
  q += o.q;
  return *this;
}

Iterate& Iterate::operator-=(const Iterate& o) {
  y -= o.y;
  z -= o.z;
  x -= o.x;
  u -= o.u;
  q -= o.q;
  return *this;
}

Iterate& Iterate::operator*=(double s) {
  y *= s;
  z *= s;
  x *= s;
  u *= s;
  q *= s;
  return *this;
}

Iterate& Iterate::axpy(double a, const Iterate& o) {
  y += a * o.y;
  z.axpy(a, o.z);
  x.axpy(a, o.x);
  u += a * o.u;
  q.axpy(a, o.q);
  return *this;
}

double Iterate::squared_norm() const {
  return y.squaredNorm() + z.squared_norm() + x.squared_norm() + u.squaredNorm() + q.squared_norm();
}

bool Iterate::all_finite() const {
  return y.allFinite() && z.all_finite() && x.all_finite() && u.allFinite() && q.all_finite();
}

Iterate operator+(Iterate a, const Iterate& b) { return a += b; }
Iterate operator-(Iterate a, const Iterate& b) { return a -= b; }
Iterate operator*(double s, Iterate a) { return a *= s; }

double inner(const Iterate& a, const Iterate& b) {
  return a.y.dot(b.y) + inner(a.z, b.z) + inner(a.x, b.x) + a.u.dot(b.u) + inner(a.q, b.q);
}

Vec prox_box(const Vec& v, const Vec& lo, const Vec& hi) {
  if (v.size() != lo.size() || v.size() != hi.size()) throw StructuralError("prox_box: length mismatch");
  Vec out(v.size());
  for (Index i = 0; i < v.size(); ++i) out[i] = std::min(std::max(v[i], lo[i]), hi[i]);
  return out;
}

SymBlockMatd prox_h(const SymBlockMatd& v, double /*sigma*/, const HSpec& h) {
  switch (h.kind) {
    case HSpec::Kind::absent: return v;
    case HSpec::Kind::nonneg: return v.cwise([](double t) { return t > 0.0 ? t : 0.0; });
    case HSpec::Kind::box: {
      const double lo = h.lower, hi = h.upper;
      return v.cwise([lo, hi](double t) { return std::min(std::max(t, lo), hi); });
    }
  }
  return v;
}

SymBlockMatd spectral_argument(const Iterate& w, const ProblemSpec& p, double sigma) {
  SymBlockMatd g = apply_At(p.A, w.y);
  if (p.has_h()) g += w.z;
  g -= p.c;
  g *= sigma;
  g += w.x;
  return g;
}

namespace {

void check_conform(const Iterate& w, const ProblemSpec& p) {
  if (w.y.size() != p.m() || w.u.size() != p.m()) throw StructuralError("iterate vector length differs from m");
  if (!p.A.conforms(w.x) || !p.A.conforms(w.z) || !p.A.conforms(w.q))
    throw StructuralError("iterate block structure differs from problem");
}

double sq_dist(const Vec& a, const Vec& b) { return (a - b).squaredNorm(); }

}  // namespace

double eval_phi(const Iterate& w, const ProblemSpec& p, double sigma) {
  check_conform(w, p);
  if (!(sigma > 0)) throw StructuralError("sigma must be positive");
  // Each term is the Moreau envelope (1/2s)(|v|^2 - |v - Pi(v)|^2) of the
  // corresponding conjugate, evaluated at its shifted argument.
  const SymBlockMatd g = spectral_argument(w, p, sigma);
  const SymBlockMatd pk = project_psd(g).first;
  double val = pk.squared_norm();  // |g|^2 - |g - Pi_K(g)|^2 = |Pi_K(g)|^2

  const Vec bu = w.u - sigma * w.y;
  const Vec pq = prox_box(bu, p.lo, p.hi);
  val += bu.squaredNorm() - sq_dist(bu, pq);

  const SymBlockMatd hq = w.q - sigma * w.z;
  if (p.has_h()) {
    const SymBlockMatd ph = prox_h(hq, sigma, p.h);
    val += hq.squared_norm() - (hq - ph).squared_norm();
  } else {
    val += hq.squared_norm();
  }
  val -= w.x.squared_norm() + w.u.squaredNorm() + w.q.squared_norm();
  return val / (2.0 * sigma);
}

Residual eval_F(const Iterate& w, const ProblemSpec& p, double sigma) {
  check_conform(w, p);
  if (!(sigma > 0)) throw StructuralError("sigma must be positive");
  if (!w.all_finite()) throw NumericError("eval_F: non-finite iterate");

  Residual r;
  const SymBlockMatd g = spectral_argument(w, p, sigma);
  auto [pk, eig] = project_psd(g);
  r.eig = std::move(eig);

  r.box_arg = w.u - sigma * w.y;
  const Vec pq = prox_box(r.box_arg, p.lo, p.hi);

  r.F.y = apply_A(p.A, pk) - pq;
  r.F.x = (w.x - pk) * (1.0 / sigma);
  r.F.u = (w.u - pq) / sigma;
  if (p.has_h()) {
    r.h_arg = w.q - sigma * w.z;
    const SymBlockMatd ph = prox_h(r.h_arg, sigma, p.h);
    r.F.z = pk - ph;
    r.F.q = (w.q - ph) * (1.0 / sigma);
  } else {
    r.F.z = SymBlockMatd(p.dims());
    r.F.q = SymBlockMatd(p.dims());
  }
  r.proj = std::move(pk);
  r.norm = r.F.norm();
  if (!std::isfinite(r.norm)) throw NumericError("eval_F: non-finite residual");
  return r;
}

SdpResidual eval_sdp_residual(const Vec& y, const SymBlockMatd& x, const ProblemSpec& p, double sigma) {
  if (!p.is_standard_sdp()) throw StructuralError("reduced SDP residual requires h absent and equality constraints");
  SymBlockMatd arg = apply_At(p.A, y) - p.c;
  arg.axpy(1.0 / sigma, x);
  SdpResidual r;
  r.phi = project_psd(arg).first;
  r.Fy = sigma * apply_A(p.A, r.phi) - p.lo;
  r.Fx = x * (1.0 / sigma) - r.phi;
  return r;
}

}  // namespace ssncp
