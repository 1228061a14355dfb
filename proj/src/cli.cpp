#include "ssncp/cli.hpp"

#include "ssncp/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace ssncp {

namespace {

struct SolveFlags {
  double tol = 1e-6;
  double sigma = 1.0;
  int max_iter = 1000;
  double max_time = 3600.0;
  std::string correction;
  std::uint64_t seed = 0;
  bool random_start = false;
  bool rescale = false;
  bool no_fast_path = false;
};

void add_solve_flags(CLI::App* app, SolveFlags& f) {
  app->add_option("--tol", f.tol, "target on the KKT metric (eta1, or eta2 when h is present)");
  app->add_option("--sigma", f.sigma, "penalty parameter");
  app->add_option("--max-iter", f.max_iter, "outer iteration budget");
  app->add_option("--max-time", f.max_time, "wall-clock budget in seconds");
  app->add_option("--correction", f.correction,
                  "enable the correction step: 'theta,l,rho' or 'on' for 0.05,0.05,0.05");
  app->add_option("--seed", f.seed, "seed for --random-start");
  app->add_flag("--random-start", f.random_start, "start from a seeded random x instead of 0");
  app->add_flag("--rescale", f.rescale, "scale b and c to unit norm before solving");
  app->add_flag("--no-fast-path", f.no_fast_path, "always use the general reduced system");
}

SolverConfig make_config(const SolveFlags& f) {
  SolverConfig cfg;
  cfg.tol = f.tol;
  cfg.sigma = f.sigma;
  cfg.max_iter = f.max_iter;
  cfg.max_time = f.max_time;
  cfg.rescale = f.rescale;
  cfg.use_fast_path = !f.no_fast_path;
  if (!f.correction.empty()) {
    cfg.correction.enabled = true;
    if (f.correction != "on") {
      std::stringstream ss(f.correction);
      std::string part;
      std::vector<double> v;
      while (std::getline(ss, part, ',')) {
        char* end = nullptr;
        const double d = std::strtod(part.c_str(), &end);
        if (part.empty() || *end != '\0') throw CLI::ValidationError("--correction", "expected theta,l,rho");
        v.push_back(d);
      }
      if (v.size() != 3) throw CLI::ValidationError("--correction", "expected theta,l,rho");
      cfg.correction.theta = v[0];
      cfg.correction.l = v[1];
      cfg.correction.rho = v[2];
    }
  }
  cfg.validate();
  return cfg;
}

std::optional<Iterate> start_point(const ProblemSpec& p, const SolveFlags& f) {
  if (!f.random_start) return std::nullopt;
  std::mt19937_64 rng(f.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Iterate w = Iterate::initial(p);
  for (std::size_t k = 0; k < w.x.num_blocks(); ++k) {
    Mat& b = w.x.block(k);
    for (Index j = 0; j < b.cols(); ++j)
      for (Index i = j; i < b.rows(); ++i) b(i, j) = b(j, i) = normal(rng);
  }
  w.x = project_psd(w.x).first;
  if (p.has_h()) w.q = w.x;
  return w;
}

int status_exit(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return kExitOptimal;
    case SolveStatus::max_iter:
    case SolveStatus::max_time: return kExitBudget;
    case SolveStatus::numeric_failure: return kExitNumeric;
  }
  return kExitNumeric;
}

int cmd_solve(const std::string& input, const SolveFlags& f, const std::string& trace_path,
              const std::string& report_path, bool quiet, std::ostream& out, std::ostream& err) {
  ProblemSpec p;
  try {
    p = read_sdpa(input);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const UnsupportedError& e) {
    err << "unsupported: " << e.what() << "\n";
    return kExitParse;
  }
  const SolverConfig cfg = make_config(f);
  SolveReport rep;
  try {
    rep = solve(p, start_point(p, f), cfg);
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  }
  if (!trace_path.empty()) {
    std::ofstream t(trace_path);
    if (!t) {
      err << "cannot write " << trace_path << "\n";
      return kExitParse;
    }
    write_trace_csv(rep.trace, t);
  }
  const nlohmann::json j = report_json(rep, p, input);
  if (!report_path.empty()) {
    std::ofstream r(report_path);
    if (!r) {
      err << "cannot write " << report_path << "\n";
      return kExitParse;
    }
    r << j.dump(2) << "\n";
  }
  if (!quiet) {
    out << "status " << to_string(rep.status) << "  iter " << rep.iterations << "  time " << rep.time << "s\n";
    out.precision(6);
    out << std::scientific << "eta1 " << rep.kkt.eta1 << "  eta2 " << rep.kkt.eta2 << "  eta_g " << rep.kkt.eta_g
        << "\nobj_p " << rep.kkt.obj_p << "  obj_d " << rep.kkt.obj_d << std::defaultfloat << "\n";
  }
  return status_exit(rep.status);
}

struct GenFlags {
  std::string family;
  std::string out;
  std::string solution;
  Index n = 50;
  Index m = 100;
  Index rank_x = 20;
  Index rank_s = 20;
  std::uint64_t seed = 1;
  double density = 0.1;
  std::string graph;
  std::string affinity;
  Index clusters = 2;
  std::string biq;
};

int cmd_generate(const GenFlags& f, std::ostream& out, std::ostream& err) {
  ProblemSpec p;
  std::optional<GeneratedInstance> g;
  try {
    if (f.family == "nonsc-sdp" || f.family == "nonsc-sdpplus") {
      NonScOptions o{f.n, f.m, f.rank_x, f.rank_s, f.seed, f.density};
      g = f.family == "nonsc-sdp" ? gen_nonsc_sdp(o) : gen_nonsc_sdpplus(o);
      p = g->spec;
    } else if (f.family == "theta" || f.family == "thetaplus") {
      if (f.graph.empty()) throw CLI::ValidationError("--graph", "required for theta families");
      const Graph gr = read_edge_list(f.graph);
      p = f.family == "theta" ? gen_theta(gr.edges, gr.n) : gen_thetaplus(gr.edges, gr.n);
    } else if (f.family == "biq") {
      if (!f.biq.empty()) {
        const auto [Q0, c0] = read_biq(f.biq);
        p = gen_biq(Q0, c0);
      } else {
        std::mt19937_64 rng(f.seed);
        std::uniform_int_distribution<int> d(-20, 20);
        Mat Q0(f.n, f.n);
        Vec c0(f.n);
        for (Index j = 0; j < f.n; ++j) {
          for (Index i = j; i < f.n; ++i) Q0(i, j) = Q0(j, i) = d(rng);
          c0[j] = d(rng);
        }
        p = gen_biq(Q0, c0);
      }
    } else if (f.family == "rcp") {
      Mat W;
      if (!f.affinity.empty()) {
        W = read_dense_csv(f.affinity);
      } else {
        std::mt19937_64 rng(f.seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        Mat pts(f.n, 2);
        for (Index i = 0; i < f.n; ++i) pts.row(i) << normal(rng), normal(rng);
        W.resize(f.n, f.n);
        for (Index i = 0; i < f.n; ++i)
          for (Index j = 0; j < f.n; ++j) W(i, j) = std::exp(-(pts.row(i) - pts.row(j)).squaredNorm());
      }
      p = gen_rcp(W, f.clusters);
    } else {
      err << "unknown family '" << f.family << "'\n";
      return kExitParse;
    }
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const StructuralError& e) {
    err << "invalid parameters: " << e.what() << "\n";
    return kExitParse;
  }
  try {
    write_sdpa(p, f.out, f.family);
    if (g && g->known_solution) {
      const std::string side = f.solution.empty() ? f.out + ".solution.json" : f.solution;
      std::ofstream s(side);
      if (!s) throw std::runtime_error("cannot write " + side);
      s << known_solution_json(*g).dump(1) << "\n";
      out << "wrote " << f.out << " and " << side << "\n";
    } else {
      out << "wrote " << f.out << "\n";
    }
  } catch (const std::runtime_error& e) {
    err << e.what() << "\n";
    return kExitParse;
  }
  return kExitOptimal;
}

int thread_cap() {
  if (const char* env = std::getenv("SSNCP_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

RunRecord run_one(const std::string& path, const SolverConfig& cfg) {
  RunRecord r;
  r.instance = path;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const ProblemSpec p = read_sdpa(path);
    r.m = p.m();
    r.n = p.c.dim();
    r.family = p.has_h() ? "sdp+" : "sdp";
    const SolveReport rep = solve(p, std::nullopt, cfg);
    r.iterations = rep.iterations;
    r.kkt = rep.kkt;
    r.status = to_string(rep.status);
  } catch (const std::exception& e) {
    r.status = "error";
    r.error = e.what();
  }
  r.time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

int cmd_bench(std::vector<std::string> inputs, const std::string& list, const SolveFlags& f, int jobs, double shift,
              const std::string& records_path, const std::string& summary_path, std::ostream& out,
              std::ostream& err) {
  if (!list.empty()) {
    std::ifstream l(list);
    if (!l) {
      err << "cannot open " << list << "\n";
      return kExitParse;
    }
    std::string line;
    while (std::getline(l, line)) {
      const auto a = line.find_first_not_of(" \t\r");
      if (a == std::string::npos || line[a] == '#') continue;
      const auto b = line.find_last_not_of(" \t\r");
      inputs.push_back(line.substr(a, b - a + 1));
    }
  }
  if (inputs.empty()) {
    err << "no instances given\n";
    return kExitParse;
  }
  const SolverConfig cfg = make_config(f);
  std::vector<RunRecord> records(inputs.size());
  const int workers = std::max(1, std::min({jobs, thread_cap(), static_cast<int>(inputs.size())}));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < inputs.size(); i = next++) records[i] = run_one(inputs[i], cfg);
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const BenchSummary s = summarize(records, shift);
  out << "instance,m,n,status,iterations,time,eta1,eta_g\n";
  for (const auto& r : records)
    out << r.instance << "," << r.m << "," << r.n << "," << r.status << "," << r.iterations << "," << r.time << ","
        << r.kkt.eta1 << "," << r.kkt.eta_g << "\n";
  out << "instances " << s.instances << "  geomean " << s.geomean_time << "s  success-1e-2 " << s.success_1e2
      << "  success-1e-4 " << s.success_1e4 << "  failures " << s.failures << "\n";
  if (!records_path.empty()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records) arr.push_back(run_record_json(r));
    std::ofstream(records_path) << arr.dump(2) << "\n";
  }
  if (!summary_path.empty()) std::ofstream(summary_path) << summary_json(s).dump(2) << "\n";
  return kExitOptimal;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semismooth Newton solver for SDP and SDP+ problems"};
  app.require_subcommand(1);

  SolveFlags sf;
  std::string input, trace_path, report_path;
  bool quiet = false;
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve an SDPA instance");
  solve_cmd->add_option("input", input, "SDPA sparse file")->required();
  add_solve_flags(solve_cmd, sf);
  solve_cmd->add_option("--trace", trace_path, "per-iteration CSV trace");
  solve_cmd->add_option("--report", report_path, "JSON report");
  solve_cmd->add_flag("--quiet", quiet, "suppress the summary on stdout");

  GenFlags gf;
  CLI::App* gen_cmd = app.add_subcommand("generate", "write a test instance in SDPA format");
  gen_cmd->add_option("family", gf.family, "nonsc-sdp | nonsc-sdpplus | theta | thetaplus | biq | rcp")->required();
  gen_cmd->add_option("--out,-o", gf.out, "output SDPA path")->required();
  gen_cmd->add_option("--solution", gf.solution, "known-solution JSON path (default <out>.solution.json)");
  gen_cmd->add_option("--n", gf.n, "matrix order (biq: number of binary variables; rcp: points)");
  gen_cmd->add_option("--m", gf.m, "constraint count");
  gen_cmd->add_option("--rank-x", gf.rank_x, "rank of the primal solution");
  gen_cmd->add_option("--rank-s", gf.rank_s, "rank of the dual slack");
  gen_cmd->add_option("--seed", gf.seed, "random seed");
  gen_cmd->add_option("--density", gf.density, "density of the random constraint matrices");
  gen_cmd->add_option("--graph", gf.graph, "edge list for theta families");
  gen_cmd->add_option("--affinity", gf.affinity, "dense CSV affinity matrix for rcp");
  gen_cmd->add_option("--clusters", gf.clusters, "cluster count for rcp");
  gen_cmd->add_option("--biq", gf.biq, "Biq Mac triplet file");

  SolveFlags bf;
  std::vector<std::string> bench_inputs;
  std::string bench_list, records_path, summary_path;
  int jobs = 1;
  double shift = 10.0;
  CLI::App* bench_cmd = app.add_subcommand("bench", "solve a batch and summarize");
  bench_cmd->add_option("inputs", bench_inputs, "SDPA files");
  bench_cmd->add_option("--list", bench_list, "file with one instance path per line");
  add_solve_flags(bench_cmd, bf);
  bench_cmd->add_option("--jobs,-j", jobs, "concurrent solves (capped by SSNCP_THREADS)");
  bench_cmd->add_option("--shift", shift, "geomean shift in seconds");
  bench_cmd->add_option("--records", records_path, "per-instance JSON records");
  bench_cmd->add_option("--summary", summary_path, "summary JSON");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOptimal;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOptimal;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitParse;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(input, sf, trace_path, report_path, quiet, out, err);
    if (gen_cmd->parsed()) return cmd_generate(gf, out, err);
    if (bench_cmd->parsed())
      return cmd_bench(bench_inputs, bench_list, bf, jobs, shift, records_path, summary_path, out, err);
  } catch (const CLI::Error& e) {
    err << e.what() << "\n";
    return kExitParse;
  } catch (const StructuralError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitParse;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitParse;
}

}  // namespace ssncp
