#pragma once

// Serialization of solve results, traces, known solutions and benchmark
// summaries.

#include "ssncp/newton.hpp"
#include "ssncp/problems.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace ssncp {

inline constexpr const char* kReportSchema = "ssncp-report/1";
inline constexpr const char* kTraceHeader = "k,res_norm,tau,branch,inner_iters,time";

nlohmann::json report_json(const SolveReport& r, const ProblemSpec& p, const std::string& instance);
void write_trace_csv(const std::vector<TraceEntry>& trace, std::ostream& out);

nlohmann::json known_solution_json(const GeneratedInstance& g);
KnownSolution known_solution_from_json(const nlohmann::json& j, const ProblemSpec& p);

struct RunRecord {
  std::string instance;
  std::string family;
  Index m = 0;
  Index n = 0;
  double time = 0.0;
  int iterations = 0;
  KktReport kkt;
  std::string status;
  std::string error;  // non-empty when the run did not produce a result
};

/// (prod (t_i + shift))^(1/n) - shift; 0 for an empty list.
double shifted_geomean(const std::vector<double>& times, double shift = 10.0);

struct BenchSummary {
  std::size_t instances = 0;
  double geomean_time = 0.0;
  std::size_t success_1e2 = 0;  // min(eta1, eta_g) < 1e-2
  std::size_t success_1e4 = 0;  // eta1 < 1e-4
  std::size_t failures = 0;
};

BenchSummary summarize(const std::vector<RunRecord>& records, double shift = 10.0);
nlohmann::json run_record_json(const RunRecord& r);
nlohmann::json summary_json(const BenchSummary& s);

}  // namespace ssncp
