#pragma once

// KKT metrics, strict complementarity checks and convergence-rate probes.

#include "ssncp/saddle.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>

namespace ssncp {

struct KktReport {
  double eta_p = 0, eta_d = 0, eta_K = 0, eta_Kstar = 0, eta_C1 = 0;
  double eta_P = 0, eta_C2 = 0;
  double eta_g = 0;      // |P - D| / |1 + P + D|
  double eta_g_abs = 0;  // |P - D| / (1 + |P| + |D|)
  double eta1 = 0, eta2 = 0;
  double obj_p = 0, obj_d = 0;
  /// Dual objective has an infinite conjugate term (e.g. negative z under nonneg h);
  /// obj_d then holds only the finite part.
  bool dual_infinite = false;

  /// eta2 when h is present, eta1 otherwise.
  double primary(bool has_h) const { return has_h ? eta2 : eta1; }
  std::map<std::string, double> flat() const;
};

/// s = Pi_K(c - A*y - z - x).
SymBlockMatd recover_s(const Iterate& w, const ProblemSpec& p);

KktReport compute_kkt(const Iterate& w, const ProblemSpec& p, double sigma);

struct ScResult {
  bool holds = false;
  Index rank_x = 0;
  Index rank_s = 0;
  Index n = 0;
  double inner_xs = 0.0;
  double inner_xz = 0.0;
  double min_x_plus_z = 0.0;  // SDP+ only
};

/// Strict complementarity test at a solution. Pass z for SDP+ and nullptr for SDP.
ScResult check_sc(const SymBlockMatd& x, const SymBlockMatd& s, const SymBlockMatd* z, double rank_tol = 1e-8);

struct ErrorBoundSample {
  double residual;
  double distance;
  double ratio;  // distance / residual, 0 when both vanish
};

std::vector<ErrorBoundSample> error_bound_probe(const std::vector<Iterate>& trace, const Iterate& w_star,
                                                const ProblemSpec& p, double sigma);
/// Pre-evaluated variant on (residual, distance) pairs.
std::vector<ErrorBoundSample> error_bound_probe(const std::vector<std::pair<double, double>>& pairs);

/// Least-squares slope of log r_{k+1} against log r_k over the strictly
/// decreasing tail; nullopt when fewer than 4 usable entries.
std::optional<double> superlinear_ratio(const std::vector<double>& residuals, std::size_t tail = 0);

}  // namespace ssncp
