#pragma once

// Problem statement  min <c,x> + h(x)  s.t.  A(x) in Q, x PSD,  and the
// monotone residual map F whose zeros are its KKT points.

#include "ssncp/linalg.hpp"

#include <string>

namespace ssncp {

/// Elementwise indicator h applied to the matrix variable.
struct HSpec {
  enum class Kind { absent, nonneg, box };
  Kind kind = Kind::absent;
  double lower = 0.0;
  double upper = 0.0;

  static HSpec absent() { return {}; }
  static HSpec nonneg() { return {Kind::nonneg, 0.0, 0.0}; }
  static HSpec box(double lo, double hi) { return {Kind::box, lo, hi}; }

  bool present() const { return kind != Kind::absent; }
  std::string name() const;
  bool operator==(const HSpec&) const = default;
};

struct ProblemSpec {
  SymBlockMatd c;
  ConstraintMapd A;
  Vec lo;  // Q = [lo, hi]; lo_i == hi_i encodes A(x)_i = b_i
  Vec hi;
  HSpec h;

  static ProblemSpec equality(SymBlockMatd c, ConstraintMapd A, const Vec& b, HSpec h = HSpec::absent());

  Index m() const { return A.m(); }
  std::vector<Index> dims() const { return c.dims(); }
  bool has_h() const { return h.present(); }
  bool is_singleton(Index i) const { return lo[i] == hi[i]; }
  bool all_singleton() const;
  /// Plain SDP: h absent and A(x) = b.
  bool is_standard_sdp() const { return !has_h() && all_singleton(); }
  /// Reference right-hand side used in metric denominators: b for equality rows,
  /// the largest finite bound magnitude otherwise.
  Vec reference_rhs() const;

  /// Throws StructuralError on inconsistent dimensions or bounds.
  void validate() const;
};

/// w = (y, z, x, u, q). With h absent, z and q are inert and kept at zero.
struct Iterate {
  Vec y;
  SymBlockMatd z;
  SymBlockMatd x;
  Vec u;
  SymBlockMatd q;

  static Iterate zeros(const ProblemSpec& p);
  /// y = 0, z = 0, x = x0 (or 0), u = prox_box(0), q = x.
  static Iterate initial(const ProblemSpec& p);

  Iterate& operator+=(const Iterate& o);
  Iterate& operator-=(const Iterate& o);
  Iterate& operator*=(double s);
  Iterate& axpy(double a, const Iterate& o);
  double squared_norm() const;
  double norm() const { return std::sqrt(squared_norm()); }
  bool all_finite() const;
};

Iterate operator+(Iterate a, const Iterate& b);
Iterate operator-(Iterate a, const Iterate& b);
Iterate operator*(double s, Iterate a);
double inner(const Iterate& a, const Iterate& b);

using Direction = Iterate;

/// F(w) together with the quantities it was built from.
struct Residual {
  Iterate F;           // (Fy, Fz, Fx, Fu, Fq)
  double norm = 0.0;
  EigDecompd eig;      // of G = x + sigma (A*y + z - c)
  SymBlockMatd proj;   // Pi_K(G)
  Vec box_arg;         // u - sigma y
  SymBlockMatd h_arg;  // q - sigma z (empty without h)
};

Vec prox_box(const Vec& v, const Vec& lo, const Vec& hi);
SymBlockMatd prox_h(const SymBlockMatd& v, double sigma, const HSpec& h);

/// x + sigma (A*y + z - c); z is ignored when h is absent.
SymBlockMatd spectral_argument(const Iterate& w, const ProblemSpec& p, double sigma);

/// Augmented Lagrangian value Phi(w); diagnostics and tests only.
double eval_phi(const Iterate& w, const ProblemSpec& p, double sigma);

Residual eval_F(const Iterate& w, const ProblemSpec& p, double sigma);

/// Residual of the reduced SDP form in (y, x) with phi = Pi_K(A*y - c + x / sigma):
/// Fy = sigma A(phi) - b, Fx = x / sigma - phi. Requires p.is_standard_sdp().
struct SdpResidual {
  Vec Fy;
  SymBlockMatd Fx;
  SymBlockMatd phi;
};
SdpResidual eval_sdp_residual(const Vec& y, const SymBlockMatd& x, const ProblemSpec& p, double sigma);

}  // namespace ssncp
