#pragma once

// Instance generators and file formats (SDPA sparse, edge lists, dense CSV,
// Biq Mac triplets).

#include "ssncp/saddle.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ssncp {

/// Malformed input; line() is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& msg);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input using a feature this library does not handle.
struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct KnownSolution {
  SymBlockMatd x, z, s;
  Vec y;
};

struct GeneratedInstance {
  ProblemSpec spec;
  std::optional<KnownSolution> known_solution;
  std::string family;
  std::uint64_t seed = 0;
  Index n = 0;
  Index m = 0;
  bool sc_by_construction = true;

  /// w* = (y*, z*, x*, u* = Pi_Q(A x*), q* = x*); requires known_solution.
  Iterate solution_iterate() const;
};

struct NonScOptions {
  Index n = 50;
  Index m = 100;
  Index rank_x = 20;
  Index rank_s = 20;
  std::uint64_t seed = 1;
  double density = 0.1;
};

GeneratedInstance gen_nonsc_sdp(const NonScOptions& opt);
GeneratedInstance gen_nonsc_sdpplus(const NonScOptions& opt);

using Edge = std::pair<Index, Index>;  // 0-based

ProblemSpec gen_theta(const std::vector<Edge>& edges, Index n);
ProblemSpec gen_thetaplus(const std::vector<Edge>& edges, Index n);
ProblemSpec gen_biq(const Mat& Q0, const Vec& c0);
ProblemSpec gen_rcp(const Mat& W, Index K);

struct Graph {
  Index n = 0;
  std::vector<Edge> edges;
};

/// "u v" pairs, 1-indexed, '#' comments; n is the largest vertex seen unless
/// a "# n <count>" header line is present.
Graph read_edge_list(std::istream& in, const std::string& source = "<stream>");
Graph read_edge_list(const std::string& path);
Mat read_dense_csv(std::istream& in, const std::string& source = "<stream>");
Mat read_dense_csv(const std::string& path);

/// Biq Mac triplets: "n nnz" then "i j v" (1-indexed, each pair once).
/// Objective x^T Qsym x becomes Q0 = 2 Qsym, c0 = 0.
std::pair<Mat, Vec> read_biq(std::istream& in, const std::string& source = "<stream>");
std::pair<Mat, Vec> read_biq(const std::string& path);

/// SDPA sparse format. Cost C = -F0, A_i = F_i, b = the SDPA objective vector.
/// Comment lines of the form "*ssncp: h nonneg", "*ssncp: h box LO HI" and
/// "*ssncp: qbox I LO HI" carry h and interval constraints.
ProblemSpec read_sdpa(std::istream& in, const std::string& source = "<stream>");
ProblemSpec read_sdpa(const std::string& path);
void write_sdpa(const ProblemSpec& p, std::ostream& out, const std::string& title = "ssncp");
void write_sdpa(const ProblemSpec& p, const std::string& path, const std::string& title = "ssncp");

/// Exact structural and numerical equality (coefficients compared entrywise).
bool same_problem(const ProblemSpec& a, const ProblemSpec& b);

}  // namespace ssncp
