#include "ssncp/problems.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace ssncp {

namespace {

struct LineReader {
  std::istream& in;
  const std::string& src;
  std::size_t line = 0;
  std::vector<std::string> directives;  // with line numbers below
  std::vector<std::size_t> directive_lines;

  // Next non-comment, non-blank line; false at end of input.
  bool next(std::string& out) {
    std::string l;
    while (std::getline(in, l)) {
      ++line;
      const auto first = l.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      if (l[first] == '*' || l[first] == '"') {
        const std::string body = l.substr(first + 1);
        const std::string tag = "ssncp:";
        const auto at = body.find_first_not_of(' ');
        if (at != std::string::npos && body.compare(at, tag.size(), tag) == 0) {
          directives.push_back(body.substr(at + tag.size()));
          directive_lines.push_back(line);
        }
        continue;
      }
      out = l;
      return true;
    }
    return false;
  }
};

bool looks_complex(const std::string& tok) {
  if (tok.empty()) return false;
  const char last = tok.back();
  if (last != 'i' && last != 'I' && last != 'j' && last != 'J') return false;
  // "inf" / "-inf" are real values.
  std::string low;
  for (char ch : tok) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  return low.find("inf") == std::string::npos && low.find("nan") == std::string::npos;
}

std::vector<std::string> tokens(std::string s, const std::string& src, std::size_t line) {
  for (char& ch : s)
    if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')' || ch == '=') ch = ' ';
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string t;
  while (is >> t) {
    if (looks_complex(t)) throw UnsupportedError(src + ":" + std::to_string(line) + ": complex-valued data is not supported");
    out.push_back(t);
  }
  return out;
}

double to_double(const std::string& tok, const std::string& src, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size()) throw ParseError(src, line, "expected a number, got '" + tok + "'");
  return v;
}

long long to_int(const std::string& tok, const std::string& src, std::size_t line) {
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size()) {
    // Some files write integers as "2.0".
    const double d = to_double(tok, src, line);
    if (d != static_cast<double>(static_cast<long long>(d)))
      throw ParseError(src, line, "expected an integer, got '" + tok + "'");
    return static_cast<long long>(d);
  }
  return v;
}

}  // namespace

ProblemSpec read_sdpa(std::istream& in, const std::string& src) {
  LineReader rd{in, src, 0, {}, {}};
  std::string l;

  if (!rd.next(l)) throw ParseError(src, rd.line, "empty input: missing constraint count");
  auto t = tokens(l, src, rd.line);
  if (t.empty()) throw ParseError(src, rd.line, "missing constraint count");
  const long long m = to_int(t[0], src, rd.line);
  if (m < 0) throw ParseError(src, rd.line, "negative constraint count");

  if (!rd.next(l)) throw ParseError(src, rd.line, "missing block count");
  t = tokens(l, src, rd.line);
  if (t.empty()) throw ParseError(src, rd.line, "missing block count");
  const long long nblocks = to_int(t[0], src, rd.line);
  if (nblocks <= 0) throw ParseError(src, rd.line, "block count must be positive");

  if (!rd.next(l)) throw ParseError(src, rd.line, "missing block structure");
  t = tokens(l, src, rd.line);
  if (static_cast<long long>(t.size()) < nblocks)
    throw ParseError(src, rd.line, "block structure lists " + std::to_string(t.size()) + " sizes, expected " +
                                       std::to_string(nblocks));
  // Each SDPA block maps to one or more internal blocks.
  std::vector<Index> dims;
  std::vector<Index> first_internal;
  std::vector<bool> is_lp;
  for (long long k = 0; k < nblocks; ++k) {
    const long long d = to_int(t[static_cast<std::size_t>(k)], src, rd.line);
    if (d == 0) throw ParseError(src, rd.line, "zero block size");
    first_internal.push_back(static_cast<Index>(dims.size()));
    is_lp.push_back(d < 0);
    if (d > 0) {
      dims.push_back(d);
    } else {
      for (long long i = 0; i < -d; ++i) dims.push_back(1);
    }
  }
  std::vector<Index> sdpa_size;
  for (long long k = 0; k < nblocks; ++k) sdpa_size.push_back(std::abs(to_int(t[static_cast<std::size_t>(k)], src, rd.line)));

  Vec b(m);
  long long got = 0;
  while (got < m) {
    if (!rd.next(l)) throw ParseError(src, rd.line, "right-hand side has " + std::to_string(got) + " of " + std::to_string(m) + " values");
    const std::size_t ln = rd.line;
    for (const auto& tok : tokens(l, src, ln)) {
      if (got >= m) throw ParseError(src, ln, "too many right-hand-side values");
      b[got++] = to_double(tok, src, ln);
    }
  }

  ConstraintMapd A(dims, m);
  std::vector<Mat> cblocks;
  for (Index d : dims) cblocks.push_back(Mat::Zero(d, d));
  while (rd.next(l)) {
    const std::size_t ln = rd.line;
    t = tokens(l, src, ln);
    if (t.size() != 5) throw ParseError(src, ln, "entry line needs 5 fields: matno blkno i j value");
    const long long mat = to_int(t[0], src, ln), blk = to_int(t[1], src, ln);
    long long i = to_int(t[2], src, ln), j = to_int(t[3], src, ln);
    const double v = to_double(t[4], src, ln);
    if (mat < 0 || mat > m) throw ParseError(src, ln, "matrix number out of range");
    if (blk < 1 || blk > nblocks) throw ParseError(src, ln, "block number out of range");
    const auto kb = static_cast<std::size_t>(blk - 1);
    if (i < 1 || j < 1 || i > sdpa_size[kb] || j > sdpa_size[kb]) throw ParseError(src, ln, "entry index out of range");
    Index block = first_internal[kb];
    if (is_lp[kb]) {
      if (i != j) throw ParseError(src, ln, "off-diagonal entry in a diagonal block");
      block += i - 1;
      i = j = 1;
    }
    if (mat == 0) {
      Mat& cb = cblocks[static_cast<std::size_t>(block)];
      cb(i - 1, j - 1) -= v;
      if (i != j) cb(j - 1, i - 1) -= v;
    } else {
      A.add_entry(mat - 1, block, i - 1, j - 1, v);
    }
  }

  ProblemSpec p{SymBlockMatd(std::move(cblocks)), std::move(A), b, b, HSpec::absent()};
  for (std::size_t d = 0; d < rd.directives.size(); ++d) {
    const std::size_t ln = rd.directive_lines[d];
    const auto dt = tokens(rd.directives[d], src, ln);
    if (dt.empty()) continue;
    if (dt[0] == "h") {
      if (dt.size() == 2 && dt[1] == "nonneg")
        p.h = HSpec::nonneg();
      else if (dt.size() == 2 && dt[1] == "absent")
        p.h = HSpec::absent();
      else if (dt.size() == 4 && dt[1] == "box")
        p.h = HSpec::box(to_double(dt[2], src, ln), to_double(dt[3], src, ln));
      else
        throw ParseError(src, ln, "malformed h directive");
    } else if (dt[0] == "qbox") {
      if (dt.size() != 4) throw ParseError(src, ln, "malformed qbox directive");
      const long long i = to_int(dt[1], src, ln);
      if (i < 1 || i > m) throw ParseError(src, ln, "qbox row out of range");
      p.lo[i - 1] = to_double(dt[2], src, ln);
      p.hi[i - 1] = to_double(dt[3], src, ln);
    } else {
      throw ParseError(src, ln, "unknown ssncp directive '" + dt[0] + "'");
    }
  }
  try {
    p.validate();
  } catch (const StructuralError& e) {
    throw ParseError(src, 0, e.what());
  }
  return p;
}

ProblemSpec read_sdpa(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError(path, 0, "cannot open file");
  return read_sdpa(f, path);
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_sdpa(const ProblemSpec& p, std::ostream& out, const std::string& title) {
  p.validate();
  out << "\"" << title << "\n";
  if (p.h.kind == HSpec::Kind::nonneg) out << "*ssncp: h nonneg\n";
  if (p.h.kind == HSpec::Kind::box) out << "*ssncp: h box " << num(p.h.lower) << " " << num(p.h.upper) << "\n";
  for (Index i = 0; i < p.m(); ++i)
    if (!p.is_singleton(i)) out << "*ssncp: qbox " << i + 1 << " " << num(p.lo[i]) << " " << num(p.hi[i]) << "\n";
  out << p.m() << "\n" << p.c.num_blocks() << "\n";
  const auto dims = p.dims();
  for (std::size_t k = 0; k < dims.size(); ++k) out << (k ? " " : "") << dims[k];
  out << "\n";
  for (Index i = 0; i < p.m(); ++i) out << (i ? " " : "") << num(p.is_singleton(i) ? p.lo[i] : 0.0);
  out << "\n";
  for (std::size_t k = 0; k < p.c.num_blocks(); ++k) {
    const Mat& c = p.c.block(k);
    for (Index i = 0; i < c.rows(); ++i)
      for (Index j = i; j < c.cols(); ++j)
        if (c(i, j) != 0.0) out << "0 " << k + 1 << " " << i + 1 << " " << j + 1 << " " << num(-c(i, j)) << "\n";
  }
  for (Index i = 0; i < p.m(); ++i)
    for (const auto& e : p.A.entries(i))
      out << i + 1 << " " << e.block + 1 << " " << e.col + 1 << " " << e.row + 1 << " " << num(e.value) << "\n";
}

void write_sdpa(const ProblemSpec& p, const std::string& path, const std::string& title) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  write_sdpa(p, f, title);
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace ssncp
