// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,3,...] [--strict] [--results FILE]
//
// Without --strict the process exits 0 once every criterion has been
// evaluated, so a known failure is reported rather than masking the others;
// --strict exits with the number of failed criteria. --results also writes
// the lines to FILE.

#include "oracles.hpp"

#include "ssncp/report.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace ssncp;

namespace {

const std::string kFixtures = SSNCP_FIXTURE_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> residual_sequence(const SolveReport& r) {
  std::vector<double> v;
  for (const auto& t : r.trace) v.push_back(t.res_norm);
  v.push_back(r.residual_norm);
  return v;
}

// Solve-to-tolerance runs on the non-SC families.

NonScOptions paper_instance() {
  NonScOptions o;
  o.n = 50;
  o.m = 100;
  o.rank_x = 20;
  o.rank_s = 20;
  o.seed = 1;
  return o;
}

Outcome crit_nonsc_sdp() {
  const GeneratedInstance g = gen_nonsc_sdp(paper_instance());
  SolverConfig cfg;
  cfg.tol = 1e-12;
  cfg.max_iter = 300;
  cfg.correction.enabled = true;
  cfg.correction.theta = 0.05;
  const SolveReport with = solve(g.spec, std::nullopt, cfg);
  const auto ratio = superlinear_ratio(residual_sequence(with));

  cfg.correction.enabled = false;
  const SolveReport without = solve(g.spec, std::nullopt, cfg);
  const bool without_ok = without.status == SolveStatus::optimal ? without.iterations >= with.iterations
                                                                  : without.kkt.eta1 > 1e-10;

  Outcome o;
  o.pass = with.status == SolveStatus::optimal && with.kkt.eta1 < 1e-12 && with.iterations <= 300 &&
           with.time < 60.0 && ratio && *ratio > 1.1 && without_ok;
  o.detail = fmt("eta1 %.2e in %d iterations, %.1f s, order %.2f, %d corrections; without correction: %s eta1 %.2e "
                 "in %d iterations",
                 with.kkt.eta1, with.iterations, with.time, ratio.value_or(0.0), with.corrections,
                 to_string(without.status).c_str(), without.kkt.eta1, without.iterations);
  return o;
}

Outcome crit_nonsc_sdpplus() {
  const GeneratedInstance g = gen_nonsc_sdpplus(paper_instance());
  SolverConfig cfg;
  cfg.tol = 1e-12;
  cfg.max_iter = 300;
  cfg.max_time = 600.0;
  cfg.correction.enabled = true;
  cfg.correction.theta = cfg.correction.l = cfg.correction.rho = 0.05;
  const SolveReport r = solve(g.spec, std::nullopt, cfg);
  double best = std::numeric_limits<double>::infinity();
  for (double v : residual_sequence(r)) best = std::min(best, v);
  Outcome o;
  o.pass = r.status == SolveStatus::optimal && r.kkt.eta2 < 1e-12 && r.iterations <= 300;
  o.detail = fmt("%s: eta2 %.2e after %d iterations (%.0f s), best |F| %.2e, %d corrections, %d fallback steps",
                 to_string(r.status).c_str(), r.kkt.eta2, r.iterations, r.time, best, r.corrections, r.decrease2);
  return o;
}

Outcome crit_theta() {
  const std::vector<Edge> k3{{0, 1}, {0, 2}, {1, 2}};
  const std::vector<Edge> c5{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}};
  SolverConfig cfg;
  cfg.tol = 1e-8;
  const SolveReport a = solve(gen_theta(k3, 3), std::nullopt, cfg);
  const SolveReport b = solve(gen_theta(c5, 5), std::nullopt, cfg);
  Outcome o;
  o.pass = std::abs(a.kkt.obj_p + 1.0) <= 1e-5 && std::abs(b.kkt.obj_p + std::sqrt(5.0)) <= 1e-4 &&
           a.kkt.eta1 < 1e-6 && b.kkt.eta1 < 1e-6 && a.time < 5.0 && b.time < 5.0;
  o.detail = fmt("K3 %.10f (eta1 %.1e, %.3f s); C5 %.10f vs %.10f (eta1 %.1e, %.3f s)", a.kkt.obj_p, a.kkt.eta1,
                 a.time, b.kkt.obj_p, -std::sqrt(5.0), b.kkt.eta1, b.time);
  return o;
}

Outcome crit_newton_oracle() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 3), rows(1, 8);
  double worst = 0.0;
  int count = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const HSpec h = trial % 2 == 0 ? HSpec::absent() : HSpec::nonneg();
    std::vector<Index> dims{dim(rng)};
    if (trial % 3 == 0) dims.push_back(dim(rng));
    const ProblemSpec p = oracle::random_problem(rng, dims, rows(rng), h, trial % 4 == 1);
    const Iterate w = oracle::random_iterate(rng, p);
    const auto basis = oracle::svec_basis(p.dims());
    const oracle::Layout L{p.m(), static_cast<Index>(basis.size()), p.has_h()};
    const double sigma = 1.0, tau = 0.05;
    const Residual r = eval_F(w, p, sigma);
    const JacElement el = build_jac_element(r, p, sigma);
    const InnerSolve s = solve_newton_system(el, p, TauVec::uniform(tau), r.F, 1e-13 * r.norm);
    const Mat J = oracle::dense_jacobian(w, p, sigma, tau, basis);
    const Vec ref = J.partialPivLu().solve(-oracle::pack(r.F, basis, L));
    worst = std::max(worst, (oracle::pack(s.d, basis, L) - ref).norm() / ref.norm());
    ++count;
  }
  return {worst <= 1e-8, fmt("%d instances, worst relative difference %.2e", count, worst)};
}

Outcome crit_finite_differences() {
  std::mt19937_64 rng(2025);
  double worst = 0.0;
  int points = 0;
  const double eps = 1e-6;
  for (int inst = 0; inst < 5; ++inst) {
    const HSpec h = inst % 2 == 0 ? HSpec::nonneg() : HSpec::absent();
    const ProblemSpec p = oracle::random_problem(rng, {4, 2}, 4, h, inst >= 3);
    for (int trial = 0; trial < 10; ++trial, ++points) {
      const Iterate w = oracle::random_iterate(rng, p);
      const Direction d = oracle::random_iterate(rng, p);
      const double sigma = inst == 4 ? 0.5 : 1.0;
      const Iterate fd = (1.0 / eps) * (eval_F(w + eps * d, p, sigma).F - eval_F(w, p, sigma).F);
      const JacElement el = build_jac_element(w, p, sigma);
      worst = std::max(worst, (fd - jac_matvec(el, p, TauVec{}, d)).norm() / d.norm());
    }
  }
  return {worst <= 1e-5, fmt("%d points, worst |FD - Jd| / |d| = %.2e", points, worst)};
}

Outcome crit_monotone() {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> scale(0.01, 3.0);
  double worst = std::numeric_limits<double>::infinity();
  int pairs = 0;
  const HSpec kinds[] = {HSpec::absent(), HSpec::nonneg(), HSpec::box(-0.5, 1.0)};
  for (int inst = 0; inst < 10; ++inst) {
    const ProblemSpec p = oracle::random_problem(rng, {3, 2}, 4, kinds[inst % 3], inst % 2 == 1);
    const double sigma = inst < 5 ? 1.0 : 2.5;
    for (int trial = 0; trial < 100; ++trial, ++pairs) {
      const Iterate a = oracle::random_iterate(rng, p, scale(rng));
      const Iterate b = trial % 2 == 0 ? oracle::random_iterate(rng, p, scale(rng))
                                       : a + oracle::random_iterate(rng, p, 1e-3);
      const Iterate dw = a - b;
      const double v = inner(eval_F(a, p, sigma).F - eval_F(b, p, sigma).F, dw);
      worst = std::min(worst, v / (1.0 + dw.squared_norm()));
    }
  }
  return {worst >= -1e-10, fmt("%d pairs on 10 instances, min <dF, dw> / (1 + |dw|^2) = %.2e", pairs, worst)};
}

// Problem whose spectral argument at the initial iterate is G (sigma = 1).
JacElement element_of(const SymBlockMatd& G) {
  ConstraintMapd A(G.dims(), 1);
  A.add_entry(0, 0, 0, 0, 1.0);
  const ProblemSpec p = ProblemSpec::equality(-1.0 * G, std::move(A), Vec::Zero(1));
  return build_jac_element(Iterate::initial(p), p, 1.0);
}

Outcome crit_lowrank() {
  std::mt19937_64 rng(2027);
  std::uniform_int_distribution<int> dim(1, 8);
  std::uniform_real_distribution<double> mag(0.05, 3.0);
  std::bernoulli_distribution coin(0.5);
  double worst_lr = 0.0, worst_inv = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Index> dims{dim(rng), dim(rng)};
    std::vector<Mat> blocks;
    for (Index n : dims) {
      Eigen::HouseholderQR<Mat> qr(oracle::random_sym(rng, {n}).block(0));
      const Mat Q = qr.householderQ();
      Vec lam(n);
      // Skewed positive fractions exercise both branches of the rank split.
      const double frac = trial % 3 == 0 ? 0.2 : (trial % 3 == 1 ? 0.8 : 0.5);
      for (Index i = 0; i < n; ++i) lam[i] = (coin(rng) ? frac : 1 - frac) > 0.5 ? mag(rng) : -mag(rng);
      blocks.push_back(Q * lam.asDiagonal() * Q.transpose());
    }
    const JacElement el = element_of(SymBlockMatd(std::move(blocks)));
    const SymBlockMatd H = oracle::random_sym(rng, dims);
    const SymBlockMatd a = apply_DK(el, H);
    worst_lr = std::max(worst_lr, (a - apply_DK_lowrank(el, H)).norm() / (1.0 + a.norm()));
    for (double tau : {1e-4, 0.1, 1.0}) {
      const SymBlockMatd back = apply_DKtau(el, tau, apply_DKtau_inv(el, tau, H));
      worst_inv = std::max(worst_inv, (back - H).norm() / H.norm());
    }
  }
  return {worst_lr <= 1e-11 && worst_inv <= 1e-10,
          fmt("200 cases: low-rank vs dense %.2e, inverse composition %.2e", worst_lr, worst_inv)};
}

SymBlockMatd diag(const std::vector<double>& v) {
  Vec d(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) d[static_cast<Index>(i)] = v[i];
  return SymBlockMatd(std::vector<Mat>{d.asDiagonal()});
}

Outcome crit_sc() {
  struct Case {
    std::vector<double> x, s, z;
    bool expect;
  };
  // Expected labels written out by hand from the rank and complementarity conditions.
  const std::vector<Case> cases{
      {{1, 0}, {0, 1}, {}, true},
      {{1, 0}, {0, 0}, {}, false},
      {{2, 3, 0}, {0, 0, 1}, {}, true},
      {{2, 0, 0}, {0, 0, 5}, {}, false},
      {{1, 1, 1}, {0, 0, 0}, {}, true},
      {{0, 0, 0}, {0, 0, 0}, {}, false},
      {{1, 0, 0, 0}, {0, 1, 1, 1}, {}, true},
      {{1, 0}, {1, 1}, {}, false},
      {{1, 0}, {0, 1}, {0, 2}, true},
      {{1, 0}, {0, 1}, {0, 0}, false},
  };
  int correct = 0;
  for (const Case& c : cases) {
    ScResult r;
    if (c.z.empty()) {
      r = check_sc(diag(c.x), diag(c.s), nullptr);
    } else {
      // Positive off-diagonal entries; the diagonal decides.
      SymBlockMatd z = SymBlockMatd::constant({static_cast<Index>(c.z.size())}, 1.0);
      for (std::size_t i = 0; i < c.z.size(); ++i) z.block(0)(static_cast<Index>(i), static_cast<Index>(i)) = c.z[i];
      r = check_sc(diag(c.x), diag(c.s), &z);
    }
    correct += r.holds == c.expect;
  }
  const NonScOptions o = paper_instance();
  const GeneratedInstance g = gen_nonsc_sdp(o), gp = gen_nonsc_sdpplus(o);
  const bool g_non = !check_sc(g.known_solution->x, g.known_solution->s, nullptr).holds;
  const bool gp_non = !check_sc(gp.known_solution->x, gp.known_solution->s, &gp.known_solution->z).holds;
  return {correct == 10 && g_non && gp_non,
          fmt("%d/10 hand cases; generated SDP non-SC: %s, SDP+ non-SC: %s", correct, g_non ? "yes" : "no",
              gp_non ? "yes" : "no")};
}

Outcome crit_biq() {
  const int k = 10;
  const int q[k][k] = {{18, -2, 11, 10, 1, -2, 2, 2, -8, -14},   {-2, 16, 5, -9, -6, 7, -8, 0, -13, 4},
                       {11, 5, -6, -5, 12, 5, 7, 4, 10, -1},     {10, -9, -5, 20, -1, 5, -1, 0, 5, 1},
                       {1, -6, 12, -1, 16, 8, 2, -10, -8, -15},  {-2, 7, 5, 5, 8, 18, -3, -7, -1, 1},
                       {2, -8, 7, -1, 2, -3, -16, -4, 19, 9},    {2, 0, 4, 0, -10, -7, -4, 14, 10, -7},
                       {-8, -13, 10, 5, -8, -1, 19, 10, 8, 5},   {-14, 4, -1, 1, -15, 1, 9, -7, 5, 16}};
  const double c[k] = {4, -3, 3, 2, -8, -9, 3, -2, 2, -4};
  Mat Q0(k, k);
  Vec c0(k);
  for (int i = 0; i < k; ++i) {
    c0[i] = c[i];
    for (int j = 0; j < k; ++j) Q0(i, j) = q[i][j];
  }
  double binary = std::numeric_limits<double>::infinity();
  for (unsigned bits = 0; bits < (1u << k); ++bits) {
    Vec x(k);
    for (int i = 0; i < k; ++i) x[i] = (bits >> i) & 1u;
    binary = std::min(binary, 0.5 * x.dot(Q0 * x) + c0.dot(x));
  }
  SolverConfig cfg;
  cfg.tol = 1e-8;
  const SolveReport r = solve(gen_biq(Q0, c0), std::nullopt, cfg);
  const double interior_point = -30.571220528519518;
  return {r.kkt.obj_p <= binary + 1e-6 && r.kkt.eta2 < 1e-6,
          fmt("relaxation %.8f <= binary optimum %.1f (interior-point reference %.8f), eta2 %.1e, %d iterations",
              r.kkt.obj_p, binary, interior_point, r.kkt.eta2, r.iterations)};
}

Outcome crit_rcp() {
  const Vec pts = (Vec(5) << 0.0, 0.3, 1.1, 2.0, 2.4).finished();
  Mat W5(5, 5);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 5; ++j) W5(i, j) = std::exp(-(pts[i] - pts[j]) * (pts[i] - pts[j]));
  const Mat W2 = (Mat(2, 2) << 1.0, 0.4, 0.4, 2.0).finished();
  // n = 2, K = 1: Xe = e and tr X = 1 leave X = [[t, 1 - t], [1 - t, t]] with t = 1/2 forced by the trace.
  const double w2_exact = -(W2(0, 0) + W2(1, 1)) / 2 - W2(0, 1);
  SolverConfig cfg;
  cfg.tol = 1e-9;
  const SolveReport a = solve(gen_rcp(W5, 2), std::nullopt, cfg);
  const SolveReport b = solve(gen_rcp(W2, 1), std::nullopt, cfg);
  const double w5_ref = -4.01175771454779;
  return {std::abs(a.kkt.obj_p - w5_ref) <= 1e-5 && std::abs(b.kkt.obj_p - w2_exact) <= 1e-5 && a.kkt.eta2 < 1e-6 &&
              b.kkt.eta2 < 1e-6,
          fmt("n=5 K=2: %.10f vs %.10f (eta2 %.1e); n=2 K=1: %.10f vs %.10f (eta2 %.1e)", a.kkt.obj_p, w5_ref,
              a.kkt.eta2, b.kkt.obj_p, w2_exact, b.kkt.eta2)};
}

Outcome crit_correction() {
  std::mt19937_64 rng(2028);
  // Zero thresholds.
  bool identity = true;
  for (int trial = 0; trial < 10; ++trial) {
    const ProblemSpec p =
        oracle::random_problem(rng, {3, 2}, 4, trial % 2 ? HSpec::nonneg() : HSpec::box(-1, 1), true);
    const Iterate w = oracle::random_iterate(rng, p);
    identity = identity && (correction_apply(w, p, 1.0, 0, 0, 0) - w).norm() == 0.0;
  }
  // Eigenvalue thresholding: spectrum (1, 0.01, -0.03, -0.8) with theta = 0.1.
  Eigen::HouseholderQR<Mat> qr(oracle::random_sym(rng, {4}).block(0));
  const Mat Q = qr.householderQ();
  const Vec lam = (Vec(4) << 1.0, 0.01, -0.03, -0.8).finished();
  ConstraintMapd A({4}, 1);
  A.add_entry(0, 0, 0, 0, 1.0);
  const ProblemSpec pe = ProblemSpec::equality(SymBlockMatd(std::vector<Mat>{-(Q * lam.asDiagonal() * Q.transpose())}),
                                               std::move(A), Vec::Zero(1));
  CorrectionStats st;
  const Iterate ce = correction_apply(Iterate::initial(pe), pe, 1.0, 0.1, 0, 0, &st);
  const Vec after = sym_eig(spectral_argument(ce, pe, 1.0)).lambda[0];
  bool eigen_ok = st.eigen == 2;
  for (Index i = 0; i < 4; ++i)
    eigen_ok = eigen_ok && (std::abs(lam[i]) < 0.05 ? std::abs(after[i]) < 1e-13 : std::abs(after[i] - lam[i]) < 1e-13);
  // Nonneg h: thresholded entries land on the kink q - sigma z = 0.
  const ProblemSpec ph = oracle::random_problem(rng, {5}, 2, HSpec::nonneg());
  const Iterate wh = oracle::random_iterate(rng, ph, 0.05);
  const double sigma = 2.0, l = 0.1;
  const Iterate ch = correction_apply(wh, ph, sigma, 0, l, 0);
  int hits = 0;
  bool kink_ok = true;
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 5; ++j) {
      const bool in = std::abs(wh.z.block(0)(i, j)) < l / (2 * sigma) && std::abs(wh.q.block(0)(i, j)) < l / 2;
      if (!in) continue;
      ++hits;
      kink_ok = kink_ok && std::abs(ch.q.block(0)(i, j) - sigma * ch.z.block(0)(i, j)) < 1e-15;
    }
  return {identity && eigen_ok && kink_ok && hits > 0,
          fmt("identity %s; eigenvalues zeroed %ld of 4 (expected 2) %s; %d thresholded entries on the kink %s",
              identity ? "ok" : "broken", static_cast<long>(st.eigen), eigen_ok ? "ok" : "wrong", hits,
              kink_ok ? "ok" : "off")};
}

// Instances for the global convergence suite, each with a feasible interior.
std::vector<std::pair<std::string, ProblemSpec>> convergence_suite() {
  std::vector<std::pair<std::string, ProblemSpec>> out;
  const std::vector<Edge> c5{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}};
  out.emplace_back("theta C5", gen_theta(c5, 5));
  out.emplace_back("theta+ C5", gen_thetaplus(c5, 5));
  out.emplace_back("theta K3", gen_theta({{0, 1}, {0, 2}, {1, 2}}, 3));
  out.emplace_back("biq 2", gen_biq(Mat::Zero(2, 2), -Vec::Ones(2)));
  out.emplace_back("rcp 2", gen_rcp((Mat(2, 2) << 1.0, 0.4, 0.4, 2.0).finished(), 1));
  NonScOptions o{10, 15, 3, 4, 3, 0.3};
  out.emplace_back("non-SC sdp", gen_nonsc_sdp(o).spec);
  out.emplace_back("non-SC sdp+", gen_nonsc_sdpplus(o).spec);
  std::mt19937_64 rng(2029);
  for (int t = 0; t < 3; ++t) {
    const HSpec h = t == 1 ? HSpec::nonneg() : HSpec::absent();
    ProblemSpec p = oracle::random_problem(rng, {4, 2}, 4, h, t == 2);
    const SymBlockMatd x0 = project_psd(oracle::random_sym(rng, p.dims())).first + SymBlockMatd::identity(p.dims());
    const Vec b = apply_A(p.A, h.present() ? x0.cwise([](double v) { return std::abs(v); }) : x0);
    p.hi += b - p.lo;
    p.lo = b;
    p.c = SymBlockMatd::identity(p.dims());
    out.emplace_back("random " + std::to_string(t), std::move(p));
  }
  return out;
}

struct RunBound {
  bool converged = false;
  int k = 0;
  int fallback_steps = 0;
  int violations = 0;
  double tightest = 0.0;  // max increase * k^(3 beta) / M-hat
  double M_hat = 0.0;
};

// Runs the outer loop and checks every fallback step against the increase bound.
RunBound run_with_bound(const ProblemSpec& p, const SolverConfig& cfg, int budget, std::mt19937_64& rng) {
  SolveState st = SolveState::start(p, Iterate::initial(p), cfg);
  // Lipschitz estimate of F: random pairs plus every accepted step.
  double L = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Iterate a = oracle::random_iterate(rng, p, 0.1 + t * 0.01);
    const Iterate b = a + oracle::random_iterate(rng, p, t % 2 ? 1e-3 : 1.0);
    L = std::max(L, (eval_F(a, p, cfg.sigma).F - eval_F(b, p, cfg.sigma).F).norm() / (a - b).norm());
  }
  double B = st.F0;
  struct Step {
    int k;
    double before, after;
  };
  std::vector<Step> fallbacks;
  RunBound out;
  while (st.k < budget && st.Fw.norm > 1e-6 * st.F0) {
    const Iterate w_prev = st.w, F_prev = st.Fw.F;
    st = step(std::move(st), p, cfg);
    const TraceEntry& t = st.trace.back();
    if (t.step_norm > 0) L = std::max(L, (st.Fw.F - F_prev).norm() / (st.w - w_prev).norm());
    B = std::max(B, st.Fw.norm);
    if (t.branch == Branch::decrease2) fallbacks.push_back({t.k, t.res_norm, t.res_next});
  }
  out.converged = st.Fw.norm <= 1e-6 * st.F0;
  out.k = st.k;
  out.fallback_steps = static_cast<int>(fallbacks.size());
  out.M_hat = 4.0 * cfg.kappa1 * cfg.kappa1 * (std::max(L, 1.0) * std::max(L, 1.0) * B * B + st.C_eta * st.C_eta);
  for (const Step& s : fallbacks) {
    const double kb = std::pow(std::max(s.k, 1), 3.0 * cfg.beta);
    const double increase = s.after * s.after - s.before * s.before;
    out.tightest = std::max(out.tightest, increase * kb / out.M_hat);
    if (increase > out.M_hat / kb) ++out.violations;
  }
  return out;
}

Outcome crit_global() {
  std::mt19937_64 rng(2030);
  int converged = 0, total = 0, fallbacks = 0, violations = 0;
  double tightest = 0.0;
  std::string misses;
  for (const auto& [name, p] : convergence_suite()) {
    ++total;
    SolverConfig cfg;
    const RunBound r = run_with_bound(p, cfg, 500, rng);
    converged += r.converged;
    if (!r.converged) misses += " " + name;
    fallbacks += r.fallback_steps;
    violations += r.violations;
    tightest = std::max(tightest, r.tightest);
    // Same instance with the Newton acceptance test disabled: every step is a fallback step.
    SolverConfig forced;
    forced.nu = 1e-9;
    forced.varsigma_scale = 0.0;
    const RunBound f = run_with_bound(p, forced, 40, rng);
    fallbacks += f.fallback_steps;
    violations += f.violations;
    tightest = std::max(tightest, f.tightest);
  }
  return {converged == total && violations == 0,
          fmt("%d/%d instances reach 1e-6 |F(w0)|%s; %d fallback steps checked, %d violations, worst "
              "increase at %.2e of the bound",
              converged, total, misses.empty() ? "" : (" (missed:" + misses + ")").c_str(), fallbacks, violations,
              tightest)};
}

Outcome crit_sdpa() {
  std::mt19937_64 rng(2031);
  std::vector<ProblemSpec> specs;
  const std::vector<Edge> c5{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}};
  specs.push_back(gen_theta(c5, 5));
  specs.push_back(gen_thetaplus(c5, 5));
  specs.push_back(gen_biq(oracle::random_sym(rng, {4}).block(0), oracle::random_vec(rng, 4)));
  specs.push_back(gen_rcp(Mat::Ones(4, 4), 2));
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    NonScOptions o{12, 20, 4, 5, seed, 0.1};
    specs.push_back(gen_nonsc_sdp(o).spec);
    specs.push_back(gen_nonsc_sdpplus(o).spec);
  }
  specs.push_back(gen_nonsc_sdp(paper_instance()).spec);
  specs.push_back(gen_nonsc_sdpplus(paper_instance()).spec);
  specs.push_back(oracle::random_problem(rng, {3, 1, 2}, 5, HSpec::box(-0.5, 2.0), true));
  int same = 0;
  for (const auto& p : specs) {
    std::stringstream ss;
    write_sdpa(p, ss);
    same += same_problem(read_sdpa(ss), p);
  }
  const std::pair<const char*, std::size_t> malformed[] = {{"empty.dat-s", 0},
                                                           {"bad_m.dat-s", 2},
                                                           {"block_mismatch.dat-s", 4},
                                                           {"bad_triplet.dat-s", 7},
                                                           {"truncated_rhs.dat-s", 5}};
  int rejected = 0;
  std::string lines;
  for (const auto& [file, line] : malformed) {
    try {
      read_sdpa(kFixtures + "/malformed/" + file);
    } catch (const ParseError& e) {
      const std::string tag = ":" + std::to_string(line) + ":";
      rejected += e.line() == line && (line == 0 || std::string(e.what()).find(tag) != std::string::npos);
      lines += " " + std::to_string(e.line());
    }
  }
  return {same == static_cast<int>(specs.size()) && rejected == 5,
          fmt("%d/%zu specs round-trip; %d/5 malformed files rejected at lines%s", same, specs.size(), rejected,
              lines.c_str())};
}

Outcome crit_geomean() {
  const double g = shifted_geomean({10.0, 10.0}, 10.0);
  std::ifstream in(kFixtures + "/bench_records.json");
  const auto j = nlohmann::json::parse(in);
  std::vector<RunRecord> records;
  for (const auto& x : j["records"]) {
    RunRecord r;
    r.instance = x["instance"];
    r.time = x["time"];
    r.kkt.eta1 = x["eta1"];
    r.kkt.eta_g = x["eta_g"];
    r.error = x.value("error", "");
    records.push_back(r);
  }
  const BenchSummary s = summarize(records, j["shift"]);
  const auto& e = j["expected"];
  const bool counts = s.instances == 6 && s.success_1e2 == e["success_1e-2"].get<std::size_t>() &&
                      s.success_1e4 == e["success_1e-4"].get<std::size_t>() &&
                      s.failures == e["failures"].get<std::size_t>();
  return {g == 10.0 && counts, fmt("geomean(10, 10; shift 10) = %.17g; fixture counts 1e-2: %zu, 1e-4: %zu, "
                                   "failures: %zu",
                                   g, s.success_1e2, s.success_1e4, s.failures)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  bool strict = false;
  std::ofstream results;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--strict") {
      strict = true;
    } else if (a == "--results" && i + 1 < argc) {
      results.open(argv[++i]);
      if (!results) {
        std::cerr << "cannot write " << argv[i] << "\n";
        return 2;
      }
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string part;
      while (std::getline(ss, part, ',')) only.insert(std::stoi(part));
    } else {
      std::cerr << "usage: acceptance [--only 1,3,...] [--strict] [--results FILE]\n";
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"non-SC SDP with correction", crit_nonsc_sdp},
      {"non-SC SDP+ with correction", crit_nonsc_sdpplus},
      {"Lovasz theta values", crit_theta},
      {"Newton direction vs dense solve", crit_newton_oracle},
      {"Jacobian vs finite differences", crit_finite_differences},
      {"monotonicity of F", crit_monotone},
      {"low-rank spectral operators", crit_lowrank},
      {"strict complementarity checker", crit_sc},
      {"BIQ relaxation", crit_biq},
      {"RCP small instances", crit_rcp},
      {"correction step", crit_correction},
      {"global convergence suite", crit_global},
      {"SDPA round trip and rejection", crit_sdpa},
      {"shifted geomean and bench summary", crit_geomean},
  };

  int failed = 0, run = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    ++run;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    const std::string line = std::string(o.pass ? "PASS" : "FAIL") + "  " + std::to_string(id) + ". " +
                             criteria[i].first + "  (" + o.detail + "; " + fmt("%.1f s", seconds_since(t0)) + ")";
    std::cout << line << std::endl;
    if (results) results << line << std::endl;
  }
  const std::string total = std::to_string(run - failed) + "/" + std::to_string(run) + " criteria passed";
  std::cout << total << std::endl;
  if (results) results << total << std::endl;
  return strict ? failed : 0;
}
