#include "ssncp/problems.hpp"

#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace ssncp {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& msg)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + msg : source + ": " + msg),
      line_(line) {}

Iterate GeneratedInstance::solution_iterate() const {
  if (!known_solution) throw StructuralError("instance has no known solution");
  const KnownSolution& ks = *known_solution;
  Iterate w = Iterate::zeros(spec);
  w.y = ks.y;
  w.x = ks.x;
  if (spec.has_h()) {
    w.z = ks.z;
    w.q = ks.x;
  }
  w.u = prox_box(apply_A(spec.A, ks.x), spec.lo, spec.hi);
  return w;
}

namespace {

void check_nonsc(const NonScOptions& o) {
  if (o.n <= 0 || o.m <= 0) throw StructuralError("n and m must be positive");
  if (o.rank_x < 0 || o.rank_s < 0 || o.rank_x + o.rank_s >= o.n)
    throw StructuralError("non-SC instances need rank_x + rank_s < n");
  if (!(o.density > 0 && o.density <= 1)) throw StructuralError("density must lie in (0, 1]");
}

GeneratedInstance gen_nonsc(const NonScOptions& o, bool plus) {
  check_nonsc(o);
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Index n = o.n, m = o.m;
  const std::vector<Index> dims{n};

  ConstraintMapd A(dims, m);
  for (Index r = 0; r < n; ++r) A.add_entry(0, 0, r, r, 1.0);
  for (Index i = 1; i < m; ++i)
    for (Index c = 0; c < n; ++c)
      for (Index r = c; r < n; ++r)
        if (unif(rng) < o.density) A.add_entry(i, 0, r, c, normal(rng));

  KnownSolution ks;
  ks.x = SymBlockMatd(dims);
  ks.s = SymBlockMatd(dims);
  ks.z = SymBlockMatd(dims);
  for (Index i = 0; i < o.rank_x; ++i) ks.x.block(0)(i, i) = 1.0;
  for (Index i = n - o.rank_s; i < n; ++i) ks.s.block(0)(i, i) = 1.0;
  ks.y.resize(m);
  for (Index i = 0; i < m; ++i) ks.y[i] = normal(rng);
  if (plus) {
    Mat& z = ks.z.block(0);
    for (Index c = 0; c < n; ++c)
      for (Index r = c + 1; r < n; ++r)
        z(r, c) = z(c, r) = 1.0 + unif(rng);
  }

  SymBlockMatd c = apply_At(A, ks.y) + ks.s;
  if (plus) c += ks.z;
  const Vec b = apply_A(A, ks.x);

  GeneratedInstance g{ProblemSpec::equality(std::move(c), std::move(A), b, plus ? HSpec::nonneg() : HSpec::absent()),
                      std::move(ks), plus ? "nonsc-sdpplus" : "nonsc-sdp", o.seed, n, m, false};
  return g;
}

}  // namespace

GeneratedInstance gen_nonsc_sdp(const NonScOptions& opt) { return gen_nonsc(opt, false); }
GeneratedInstance gen_nonsc_sdpplus(const NonScOptions& opt) { return gen_nonsc(opt, true); }

ProblemSpec gen_theta(const std::vector<Edge>& edges, Index n) {
  if (n <= 0) throw StructuralError("graph needs at least one vertex");
  const std::vector<Index> dims{n};
  const Index m = static_cast<Index>(edges.size()) + 1;
  ConstraintMapd A(dims, m);
  for (Index r = 0; r < n; ++r) A.add_entry(0, 0, r, r, 1.0);
  std::set<Edge> seen;
  Index i = 1;
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) throw StructuralError("edge endpoint out of range");
    if (a == b) throw StructuralError("self-loops are not allowed");
    if (!seen.insert({std::min(a, b), std::max(a, b)}).second) throw StructuralError("duplicate edge");
    A.add_entry(i++, 0, a, b, 0.5);
  }
  Vec rhs = Vec::Zero(m);
  rhs[0] = 1.0;
  return ProblemSpec::equality(SymBlockMatd::constant(dims, -1.0), std::move(A), rhs);
}

ProblemSpec gen_thetaplus(const std::vector<Edge>& edges, Index n) {
  ProblemSpec p = gen_theta(edges, n);
  p.h = HSpec::nonneg();
  return p;
}

ProblemSpec gen_biq(const Mat& Q0, const Vec& c0) {
  const Index k = Q0.rows();
  if (Q0.cols() != k || c0.size() != k) throw StructuralError("BIQ data dimensions differ");
  if (k > 0 && (Q0 - Q0.transpose()).cwiseAbs().maxCoeff() > 0)
    throw StructuralError("BIQ matrix must be symmetric");
  const Index n = k + 1;
  Mat C = Mat::Zero(n, n);
  C.topLeftCorner(k, k) = 0.5 * Q0;
  C.block(0, k, k, 1) = 0.5 * c0;
  C.block(k, 0, 1, k) = 0.5 * c0.transpose();
  const std::vector<Index> dims{n};
  ConstraintMapd A(dims, n);
  for (Index i = 0; i < k; ++i) {
    A.add_entry(i, 0, i, i, 1.0);
    A.add_entry(i, 0, k, i, -0.5);
  }
  A.add_entry(k, 0, k, k, 1.0);
  Vec rhs = Vec::Zero(n);
  rhs[k] = 1.0;
  return ProblemSpec::equality(SymBlockMatd(std::vector<Mat>{C}), std::move(A), rhs, HSpec::nonneg());
}

ProblemSpec gen_rcp(const Mat& W, Index K) {
  const Index n = W.rows();
  if (W.cols() != n || n == 0) throw StructuralError("affinity matrix must be square and non-empty");
  if ((W - W.transpose()).cwiseAbs().maxCoeff() > 0) throw StructuralError("affinity matrix must be symmetric");
  if (K < 1 || K > n) throw StructuralError("cluster count must lie in [1, n]");
  const std::vector<Index> dims{n};
  ConstraintMapd A(dims, n + 1);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j)
        A.add_entry(i, 0, i, i, 1.0);
      else
        A.add_entry(i, 0, i, j, 0.5);
    }
  for (Index r = 0; r < n; ++r) A.add_entry(n, 0, r, r, 1.0);
  Vec rhs = Vec::Ones(n + 1);
  rhs[n] = static_cast<double>(K);
  return ProblemSpec::equality(SymBlockMatd(std::vector<Mat>{-W}), std::move(A), rhs, HSpec::nonneg());
}

namespace {

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError(path, 0, "cannot open file");
  return f;
}

double parse_double(const std::string& tok, const std::string& src, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size()) throw ParseError(src, line, "expected a number, got '" + tok + "'");
  return v;
}

long long parse_int(const std::string& tok, const std::string& src, std::size_t line) {
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (tok.empty() || end != tok.c_str() + tok.size()) throw ParseError(src, line, "expected an integer, got '" + tok + "'");
  return v;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

}  // namespace

Graph read_edge_list(std::istream& in, const std::string& src) {
  Graph g;
  Index declared = 0;
  std::string line;
  std::size_t ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      const auto toks = split_ws(line.substr(hash + 1));
      if (toks.size() == 2 && toks[0] == "n") declared = parse_int(toks[1], src, ln);
      line.resize(hash);
    }
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 2) throw ParseError(src, ln, "expected 'u v'");
    const long long u = parse_int(toks[0], src, ln), v = parse_int(toks[1], src, ln);
    if (u < 1 || v < 1) throw ParseError(src, ln, "vertices are 1-indexed");
    if (u == v) throw ParseError(src, ln, "self-loop");
    g.edges.emplace_back(u - 1, v - 1);
    g.n = std::max<Index>(g.n, std::max<Index>(u, v));
  }
  if (declared > 0) {
    if (declared < g.n) throw ParseError(src, 0, "declared vertex count smaller than largest vertex");
    g.n = declared;
  }
  if (g.n == 0) throw ParseError(src, 0, "graph has no vertices");
  return g;
}

Graph read_edge_list(const std::string& path) {
  auto f = open_or_throw(path);
  return read_edge_list(f, path);
}

Mat read_dense_csv(std::istream& in, const std::string& src) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto toks = split_ws(cell);
      if (toks.size() != 1) throw ParseError(src, ln, "malformed CSV cell");
      row.push_back(parse_double(toks[0], src, ln));
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw ParseError(src, ln, "ragged CSV row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(src, 0, "empty CSV");
  Mat M(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) M(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return M;
}

Mat read_dense_csv(const std::string& path) {
  auto f = open_or_throw(path);
  return read_dense_csv(f, path);
}

std::pair<Mat, Vec> read_biq(std::istream& in, const std::string& src) {
  std::string line;
  std::size_t ln = 0;
  Index n = -1;
  long long nnz = -1, seen = 0;
  Mat Q;
  while (std::getline(in, line)) {
    ++ln;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (n < 0) {
      if (toks.size() != 2) throw ParseError(src, ln, "expected header 'n nnz'");
      n = parse_int(toks[0], src, ln);
      nnz = parse_int(toks[1], src, ln);
      if (n <= 0 || nnz < 0) throw ParseError(src, ln, "invalid header values");
      Q = Mat::Zero(n, n);
      continue;
    }
    if (toks.size() != 3) throw ParseError(src, ln, "expected 'i j v'");
    const long long i = parse_int(toks[0], src, ln), j = parse_int(toks[1], src, ln);
    const double v = parse_double(toks[2], src, ln);
    if (i < 1 || j < 1 || i > n || j > n) throw ParseError(src, ln, "index out of range");
    Q(i - 1, j - 1) += v;
    if (i != j) Q(j - 1, i - 1) += v;
    ++seen;
  }
  if (n < 0) throw ParseError(src, 0, "empty input");
  if (seen != nnz) throw ParseError(src, 0, "triplet count differs from header");
  return {2.0 * Q, Vec::Zero(n)};
}

std::pair<Mat, Vec> read_biq(const std::string& path) {
  auto f = open_or_throw(path);
  return read_biq(f, path);
}

bool same_problem(const ProblemSpec& a, const ProblemSpec& b) {
  if (!a.c.conforms(b.c) || a.m() != b.m() || !(a.h == b.h)) return false;
  for (std::size_t k = 0; k < a.c.num_blocks(); ++k)
    if (a.c.block(k) != b.c.block(k)) return false;
  if (a.lo != b.lo || a.hi != b.hi) return false;
  for (Index i = 0; i < a.m(); ++i) {
    const auto& ea = a.A.entries(i);
    const auto& eb = b.A.entries(i);
    if (ea.size() != eb.size()) return false;
    for (std::size_t t = 0; t < ea.size(); ++t)
      if (ea[t].block != eb[t].block || ea[t].row != eb[t].row || ea[t].col != eb[t].col ||
          ea[t].value != eb[t].value)
        return false;
  }
  return true;
}

}  // namespace ssncp
