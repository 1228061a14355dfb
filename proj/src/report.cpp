#include "ssncp/report.hpp"

#include <cmath>
#include <ostream>

namespace ssncp {

namespace {

nlohmann::json blocks_json(const SymBlockMatd& m) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& b : m.blocks()) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index i = 0; i < b.rows(); ++i) {
      std::vector<double> row(b.cols());
      for (Index j = 0; j < b.cols(); ++j) row[j] = b(i, j);
      rows.push_back(row);
    }
    out.push_back(rows);
  }
  return out;
}

SymBlockMatd blocks_from_json(const nlohmann::json& j, const std::vector<Index>& dims) {
  if (!j.is_array() || j.size() != dims.size()) throw StructuralError("solution block count differs from problem");
  SymBlockMatd m(dims);
  for (std::size_t k = 0; k < dims.size(); ++k) {
    const auto& rows = j[k];
    if (!rows.is_array() || static_cast<Index>(rows.size()) != dims[k]) throw StructuralError("solution block size differs");
    for (Index r = 0; r < dims[k]; ++r) {
      const auto& row = rows[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<Index>(row.size()) != dims[k]) throw StructuralError("solution block size differs");
      for (Index c = 0; c < dims[k]; ++c) m.block(k)(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  m.symmetrize();
  return m;
}

// JSON has no infinities; non-finite metrics become null.
nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json report_json(const SolveReport& r, const ProblemSpec& p, const std::string& instance) {
  nlohmann::json j;
  j["schema"] = kReportSchema;
  j["instance"] = instance;
  j["status"] = to_string(r.status);
  j["message"] = r.message;
  j["m"] = p.m();
  j["n"] = p.c.dim();
  j["blocks"] = p.dims();
  j["h"] = p.h.name();
  j["iterations"] = r.iterations;
  j["time"] = r.time;
  j["sigma"] = r.sigma;
  j["residual_norm"] = r.residual_norm;
  j["initial_residual"] = r.initial_residual;
  j["inner_iterations"] = r.inner_iters_total;
  j["branches"] = {{"decrease1", r.decrease1}, {"decrease2", r.decrease2}};
  j["corrections"] = r.corrections;
  j["scaling"] = {{"b", r.scale_b}, {"c", r.scale_c}};
  nlohmann::json k;
  for (const auto& [name, v] : r.kkt.flat()) k[name] = finite_or_null(v);
  k["dual_infinite"] = r.kkt.dual_infinite;
  j["kkt"] = k;
  j["y"] = std::vector<double>(r.y.data(), r.y.data() + r.y.size());
  return j;
}

void write_trace_csv(const std::vector<TraceEntry>& trace, std::ostream& out) {
  out << kTraceHeader << "\n";
  out.precision(17);
  for (const auto& t : trace)
    out << t.k << "," << t.res_norm << "," << t.tau << "," << to_string(t.branch) << "," << t.inner_iters << ","
        << t.time << "\n";
}

nlohmann::json known_solution_json(const GeneratedInstance& g) {
  if (!g.known_solution) throw StructuralError("instance has no known solution");
  const auto& ks = *g.known_solution;
  nlohmann::json j;
  j["family"] = g.family;
  j["seed"] = g.seed;
  j["n"] = g.n;
  j["m"] = g.m;
  j["sc_by_construction"] = g.sc_by_construction;
  j["x"] = blocks_json(ks.x);
  j["z"] = blocks_json(ks.z);
  j["s"] = blocks_json(ks.s);
  j["y"] = std::vector<double>(ks.y.data(), ks.y.data() + ks.y.size());
  return j;
}

KnownSolution known_solution_from_json(const nlohmann::json& j, const ProblemSpec& p) {
  KnownSolution ks;
  const auto dims = p.dims();
  ks.x = blocks_from_json(j.at("x"), dims);
  ks.z = blocks_from_json(j.at("z"), dims);
  ks.s = blocks_from_json(j.at("s"), dims);
  const auto y = j.at("y").get<std::vector<double>>();
  if (static_cast<Index>(y.size()) != p.m()) throw StructuralError("solution y length differs from m");
  ks.y = Eigen::Map<const Vec>(y.data(), static_cast<Index>(y.size()));
  return ks;
}

double shifted_geomean(const std::vector<double>& times, double shift) {
  if (times.empty()) return 0.0;
  double acc = 0.0;
  for (double t : times) acc += std::log(t + shift);
  const double g = std::exp(acc / static_cast<double>(times.size())) - shift;
  // exp(log(x)) can drift by an ulp; snap when all times agree.
  bool same = true;
  for (double t : times) same = same && t == times.front();
  return same ? times.front() : g;
}

BenchSummary summarize(const std::vector<RunRecord>& records, double shift) {
  BenchSummary s;
  s.instances = records.size();
  std::vector<double> times;
  for (const auto& r : records) {
    times.push_back(r.time);
    if (!r.error.empty()) {
      ++s.failures;
      continue;
    }
    if (std::min(r.kkt.eta1, r.kkt.eta_g) < 1e-2) ++s.success_1e2;
    if (r.kkt.eta1 < 1e-4) ++s.success_1e4;
  }
  s.geomean_time = shifted_geomean(times, shift);
  return s;
}

nlohmann::json run_record_json(const RunRecord& r) {
  nlohmann::json j;
  j["instance"] = r.instance;
  j["family"] = r.family;
  j["m"] = r.m;
  j["n"] = r.n;
  j["time"] = r.time;
  j["iterations"] = r.iterations;
  j["status"] = r.status;
  if (!r.error.empty()) j["error"] = r.error;
  j["eta1"] = finite_or_null(r.kkt.eta1);
  j["eta2"] = finite_or_null(r.kkt.eta2);
  j["eta_p"] = finite_or_null(r.kkt.eta_p);
  j["eta_d"] = finite_or_null(r.kkt.eta_d);
  j["eta_g"] = finite_or_null(r.kkt.eta_g);
  j["obj_p"] = finite_or_null(r.kkt.obj_p);
  j["obj_d"] = finite_or_null(r.kkt.obj_d);
  return j;
}

nlohmann::json summary_json(const BenchSummary& s) {
  return {{"instances", s.instances},     {"geomean_time", s.geomean_time}, {"success_1e-2", s.success_1e2},
          {"success_1e-4", s.success_1e4}, {"failures", s.failures}};
}

}  // namespace ssncp
