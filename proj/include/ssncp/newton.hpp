#pragma once

// Regularized semismooth Newton outer loop with nonmonotone acceptance,
// fallback regularization and the correction step.

#include "ssncp/diagnostics.hpp"
#include "ssncp/jacobian.hpp"

#include <deque>
#include <optional>
#include <string>

namespace ssncp {

struct InnerSolve {
  Direction d;
  double residual_norm = 0.0;  // norm of (J + tau I) d + F
  int iterations = 0;
  bool converged = false;
  bool fast_path = false;
  bool direct = false;  // dense factorization used after CG stalled
};

/// Solves (J + tau I) d = -F through the reduced system in (dy, dz) with CG.
/// inner_max_iter <= 0 selects 10 (m + n). The fast path applies to plain SDPs.
/// When CG stalls and the reduced system has at most direct_limit unknowns it
/// is assembled and factorized instead.
InnerSolve solve_newton_system(const JacElement& el, const ProblemSpec& p, const TauVec& tau, const Iterate& F,
                               double inner_tol, int inner_max_iter = 0, bool allow_fast_path = true,
                               Index direct_limit = 3000);

struct CorrectionQuantities {
  SymBlockMatd q_hat, z_hat, upsilon;
  Vec u_hat, y_hat, vartheta;
  Vec u_active;  // 1 where the box has a boundary point to snap to
};

CorrectionQuantities correction_quantities(const Iterate& w, const ProblemSpec& p, double sigma);

struct CorrectionStats {
  Index eigen = 0;
  Index h_entries = 0;
  Index q_entries = 0;
};

/// P_{theta,l,rho,sigma}. l thresholds the h coordinates, rho the box coordinates.
Iterate correction_apply(const Iterate& wbar, const ProblemSpec& p, double sigma, double theta, double l, double rho,
                         CorrectionStats* stats = nullptr);

struct CorrectionConfig {
  bool enabled = false;
  double theta = 0.05;
  double l = 0.05;
  double rho = 0.05;
  double activation_threshold = 1e-3;
};

struct SolverConfig {
  double sigma = 1.0;
  double kappa = 0.1;
  double gamma = 10.0;
  int i_max = 3;
  double nu = 0.99;
  double beta = 0.4;
  double kappa1 = 1.0;
  int zeta_window = 5;
  double varsigma_scale = 1e-3;  // c_varsigma = scale * |F(w0)|
  double C_eta_scale = 1e-2;     // C_eta = scale * |F(w0)|
  double c_eta = 0.1;
  double q = 1.5;
  CorrectionConfig correction;
  double tol = 1e-6;
  int max_iter = 1000;
  double max_time = 3600.0;
  int inner_max_iter = 0;
  bool use_fast_path = true;
  Index direct_limit = 3000;
  bool rescale = false;

  void validate() const;
};

enum class Branch { decrease1, decrease2 };
std::string to_string(Branch b);

struct TraceEntry {
  int k = 0;
  double res_norm = 0.0;   // |F(w^k)|
  double res_next = 0.0;   // |F(w^{k+1})|
  double tau = 0.0;
  Branch branch = Branch::decrease1;
  int trials = 0;          // linear solves performed
  int inner_iters = 0;
  double eta_norm = 0.0;   // |eta| of the accepted direction
  double eta_bound = 0.0;
  double step_norm = 0.0;  // |w^{k+1} - w^k|
  bool corrected = false;
  double time = 0.0;       // seconds since start of solve
};

struct SolveState {
  int k = 0;
  Iterate w;
  Residual Fw;
  std::deque<double> history;
  int decrease1 = 0;
  int decrease2 = 0;
  std::vector<CorrectionStats> correction_log;
  std::vector<TraceEntry> trace;
  double F0 = 0.0;
  double c_varsigma = 0.0;
  double C_eta = 0.0;
  double c_eta = 0.1;
  double q = 1.5;
  double beta = 0.4;
  int inner_cap = 0;
  double elapsed = 0.0;

  static SolveState start(const ProblemSpec& p, Iterate w0, const SolverConfig& cfg);
  double eta_bound() const;
  double varsigma() const;
};

/// One outer iteration. Throws NumericError when the fallback solve fails.
SolveState step(SolveState state, const ProblemSpec& p, const SolverConfig& cfg);

enum class SolveStatus { optimal, max_iter, max_time, numeric_failure };
std::string to_string(SolveStatus s);

struct SolveReport {
  SolveStatus status = SolveStatus::max_iter;
  Iterate w;
  SymBlockMatd x, z, s;
  Vec y;
  KktReport kkt;
  std::vector<TraceEntry> trace;
  int iterations = 0;
  int decrease1 = 0;
  int decrease2 = 0;
  int corrections = 0;
  long inner_iters_total = 0;
  double residual_norm = 0.0;
  double initial_residual = 0.0;
  double time = 0.0;
  double sigma = 1.0;
  double scale_b = 1.0;
  double scale_c = 1.0;
  std::string message;
};

SolveReport solve(const ProblemSpec& p, std::optional<Iterate> w0, const SolverConfig& cfg);

}  // namespace ssncp
